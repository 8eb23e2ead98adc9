//! Independent re-checking of certificate trees.
//!
//! Each node is replayed from its stored data with free-group arithmetic
//! only; nothing from the rewriting module is called, so a builder bug cannot
//! certify itself.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::freegroup::{GeneratorId, Word};
use crate::presentation::Presentation;
use crate::tower::{CertificateNode, NodeKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Depth of the node, counted from the root.
    pub depth: usize,
    pub kind: &'static str,
    pub check: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "node {} ({}): {}: {}",
            self.depth, self.kind, self.check, self.detail
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Verification {
    pub violations: Vec<Violation>,
}

impl Verification {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, check: &str) -> bool {
        self.violations.iter().any(|v| v.check == check)
    }
}

pub fn verify_certificate(root: &CertificateNode) -> Verification {
    let mut out = Verification::default();
    for (depth, node) in root.path().enumerate() {
        let mut ctx = Ctx {
            depth,
            kind: node.kind.tag(),
            out: &mut out,
        };
        check_presentation(&mut ctx, &node.input);
        check_bound(&mut ctx, node);
        check_node(&mut ctx, node);
    }
    out
}

struct Ctx<'a> {
    depth: usize,
    kind: &'static str,
    out: &'a mut Verification,
}

impl Ctx<'_> {
    fn require(&mut self, cond: bool, check: &'static str, detail: impl FnOnce() -> String) {
        if !cond {
            self.out.violations.push(Violation {
                depth: self.depth,
                kind: self.kind,
                check,
                detail: detail(),
            });
        }
    }
}

fn check_presentation(ctx: &mut Ctx, p: &Presentation) {
    let mut seen = HashSet::new();
    let mut names = HashSet::new();
    for g in p.generators() {
        ctx.require(
            seen.insert(g.clone()) && names.insert(g.name()),
            "presentation",
            || format!("generator `{g}` listed twice"),
        );
    }
    for l in p.relator().letters() {
        ctx.require(seen.contains(&l.gen), "presentation", || {
            format!("relator letter `{}` is not a listed generator", l.gen)
        });
    }
    ctx.require(p.relator().is_cyclically_reduced(), "presentation", || {
        format!("relator `{}` is not cyclically reduced", p.relator())
    });
}

fn free_bound(rank: usize) -> u32 {
    if rank == 0 {
        0
    } else {
        1
    }
}

fn check_bound(ctx: &mut Ctx, node: &CertificateNode) {
    let expected = match &node.kind {
        NodeKind::FreeLeaf { rank } => free_bound(*rank),
        NodeKind::SingleElim { resulting_rank, .. } => free_bound(*resulting_rank),
        NodeKind::CyclicLeaf { .. } => 0,
        NodeKind::FreeSplit {
            split_off_rank,
            core_child,
            ..
        } if *split_off_rank > 0 => core_child.bound.max(1),
        NodeKind::FreeSplit { core_child, .. } => core_child.bound,
        NodeKind::Case1Hnn { child, .. } => child.bound + 1,
        NodeKind::Case2Embed { inner, .. } => inner.bound,
    };
    ctx.require(node.bound == expected, "bound arithmetic", || {
        format!("stored bound {} but the rule gives {expected}", node.bound)
    });
}

fn check_node(ctx: &mut Ctx, node: &CertificateNode) {
    let p = &node.input;
    let r = p.relator();
    match &node.kind {
        NodeKind::FreeLeaf { rank } => {
            let ok = (r.is_empty() && *rank == p.rank())
                || (r.len() == 1 && *rank + 1 == p.rank());
            ctx.require(ok, "leaf shape", || {
                format!(
                    "free leaf of rank {rank} over {} generators and relator length {}",
                    p.rank(),
                    r.len()
                )
            });
        }
        NodeKind::CyclicLeaf { order } => {
            let single = p.rank() == 1
                && r.len() >= 2
                && r.letters().iter().all(|l| *l == r.letters()[0]);
            ctx.require(single && r.len() as u64 == *order, "leaf shape", || {
                format!("relator `{r}` is not a power of order {order} of the only generator")
            });
        }
        NodeKind::SingleElim {
            eliminated,
            resulting_rank,
        } => {
            ctx.require(
                p.position(eliminated).is_some() && r.occurrence_count(eliminated) == 1,
                "elimination",
                || format!("`{eliminated}` does not occur exactly once"),
            );
            ctx.require(*resulting_rank + 1 == p.rank(), "resulting rank", || {
                format!("rank {resulting_rank} after eliminating from {}", p.rank())
            });
        }
        NodeKind::FreeSplit {
            free_generators,
            split_off_rank,
            core_child,
        } => {
            ctx.require(free_generators.len() == *split_off_rank, "split rank", || {
                format!(
                    "split_off_rank {split_off_rank} but {} generators listed",
                    free_generators.len()
                )
            });
            for g in free_generators {
                ctx.require(
                    p.position(g).is_some() && r.occurrence_count(g) == 0,
                    "split generator",
                    || format!("`{g}` is not an absent generator"),
                );
            }
            let remaining: Vec<&GeneratorId> = p
                .generators()
                .iter()
                .filter(|g| !free_generators.contains(g))
                .collect();
            let core = &core_child.input;
            ctx.require(
                core.generators().iter().eq(remaining.iter().copied()),
                "core generators",
                || format!("core lists {core}"),
            );
            ctx.require(core.relator() == r, "core relator", || {
                format!("core relator `{}` differs from `{r}`", core.relator())
            });
        }
        NodeKind::Case1Hnn { data, child } => {
            let t = &data.pivot_t;
            ctx.require(p.position(t).is_some(), "stable letter", || {
                format!("`{t}` is not a generator")
            });
            ctx.require(r.exponent_sum(t) == 0, "exponent sum", || {
                format!("`{t}` has exponent sum {}", r.exponent_sum(t))
            });
            ctx.require(r.occurrence_count(t) >= 2, "occurrences", || {
                format!("`{t}` occurs {} time(s)", r.occurrence_count(t))
            });

            let mut fresh_seen = HashSet::new();
            let mut pairs_seen = HashSet::new();
            let mut images: HashMap<GeneratorId, Word> = HashMap::new();
            let mut table: HashMap<GeneratorId, (GeneratorId, i64)> = HashMap::new();
            for e in &data.renaming {
                let ok = p.position(&e.base).is_some()
                    && &e.base != t
                    && p.position(&e.fresh).is_none()
                    && fresh_seen.insert(e.fresh.clone())
                    && pairs_seen.insert((e.base.clone(), e.subscript));
                ctx.require(ok, "renaming table", || {
                    format!("bad entry {} = {}^{}", e.fresh, e.base, e.subscript)
                });
                let conj = t
                    .pow(e.subscript)
                    .concat(&e.base.pow(1))
                    .concat(&t.pow(-e.subscript));
                images.insert(e.fresh.clone(), conj);
                table.insert(e.fresh.clone(), (e.base.clone(), e.subscript));
            }

            let s = &data.rewritten;
            ctx.require(s.is_cyclically_reduced() && !s.is_empty(), "rewritten relator", || {
                format!("`{s}` is empty or not cyclically reduced")
            });
            match s.substitute(&images) {
                Ok(expanded) => ctx.require(&expanded == r, "expansion mismatch", || {
                    format!("expanding `{s}` gives `{expanded}`, not `{r}`")
                }),
                Err(e) => ctx.require(false, "expansion mismatch", || e.to_string()),
            }
            ctx.require(s.len() + 2 <= r.len(), "length decrease", || {
                format!("|s| = {} but |r| = {}", s.len(), r.len())
            });

            let first_base = s.letters().first().and_then(|l| table.get(&l.gen)).map(|(b, _)| b);
            ctx.require(first_base == Some(&data.pivot_b), "pivot", || {
                format!("`{}` is not the base of the first letter", data.pivot_b)
            });
            let family: Vec<i64> = s
                .letters()
                .iter()
                .filter_map(|l| table.get(&l.gen))
                .filter(|(b, _)| b == &data.pivot_b)
                .map(|(_, i)| *i)
                .collect();
            let range = family.iter().min().zip(family.iter().max());
            ctx.require(
                range == Some((&data.subscript_min, &data.subscript_max)),
                "subscript range",
                || {
                    format!(
                        "stored m = {}, M = {} but the family spans {range:?}",
                        data.subscript_min, data.subscript_max
                    )
                },
            );
            ctx.require(data.emitted.cyclic_reduce().0 == *s, "emitted word", || {
                format!("`{}` does not reduce to `{s}`", data.emitted)
            });

            let fresh: Vec<&GeneratorId> = data.renaming.iter().map(|e| &e.fresh).collect();
            ctx.require(
                data.child.generators().iter().eq(fresh.iter().copied()) && data.child.relator() == s,
                "child presentation",
                || format!("child {} does not match the rewriting", data.child),
            );
            ctx.require(child.input == data.child, "child input", || {
                format!("child node decomposes {} instead of {}", child.input, data.child)
            });
        }
        NodeKind::Case2Embed { data, inner } => {
            let (u, v, t, b) = (&data.u, &data.v, &data.fresh_t, &data.fresh_b);
            ctx.require(
                p.position(u).is_some() && p.position(v).is_some() && u != v,
                "embedding pair",
                || format!("`{u}`, `{v}` are not two distinct generators"),
            );
            ctx.require(data.alpha == r.exponent_sum(u) && data.alpha != 0, "alpha", || {
                format!("alpha = {} but `{u}` has exponent sum {}", data.alpha, r.exponent_sum(u))
            });
            ctx.require(data.beta == r.exponent_sum(v) && data.beta != 0, "beta", || {
                format!("beta = {} but `{v}` has exponent sum {}", data.beta, r.exponent_sum(v))
            });
            ctx.require(
                p.position(t).is_none() && p.position(b).is_none() && t != b,
                "fresh generators",
                || format!("`{t}` and `{b}` must be new and distinct"),
            );

            let mut images: HashMap<GeneratorId, Word> = p
                .generators()
                .iter()
                .map(|g| (g.clone(), g.pow(1)))
                .collect();
            images.insert(u.clone(), b.pow(1).concat(&t.pow(-data.beta)));
            images.insert(v.clone(), t.pow(data.alpha));
            let pw = &data.image_relator;
            match r.substitute(&images) {
                Ok(image) => ctx.require(
                    image.equal_as_cyclic_words(pw) && pw.is_cyclically_reduced(),
                    "image relator",
                    || format!("stored p = `{pw}` but the image is `{}`", image.cyclic_reduce().0),
                ),
                Err(e) => ctx.require(false, "image relator", || e.to_string()),
            }
            ctx.require(pw.exponent_sum(t) == 0, "exponent sum", || {
                format!("`{t}` has exponent sum {} in p", pw.exponent_sum(t))
            });
            ctx.require(pw.occurrence_count(b) >= 1, "occurrences", || {
                format!("`{b}` does not occur in p")
            });
            let non_t = pw.len() - pw.occurrence_count(t);
            ctx.require(non_t + 2 <= r.len(), "length decrease", || {
                format!("p has {non_t} letters besides `{t}`; |r| = {}", r.len())
            });

            let mut expected = vec![t, b];
            expected.extend(p.generators().iter().filter(|g| *g != u && *g != v));
            let c = &data.embedded;
            ctx.require(
                c.generators().iter().eq(expected.iter().copied()),
                "embedded generators",
                || format!("embedded presentation lists {c}"),
            );
            ctx.require(c.relator() == pw, "embedded relator", || {
                format!("embedded relator `{}` is not p", c.relator())
            });
            ctx.require(inner.input == *c, "inner input", || {
                format!("inner node decomposes {} instead of {c}", inner.input)
            });
            let inner_ok = match &inner.kind {
                NodeKind::Case1Hnn { data: d, .. } => pw.occurrence_count(t) >= 2 && &d.pivot_t == t,
                NodeKind::FreeSplit {
                    free_generators, ..
                } => pw.occurrence_count(t) == 0 && free_generators.as_slice() == [t.clone()],
                _ => false,
            };
            ctx.require(inner_ok, "inner step", || {
                format!(
                    "inner node is {} but `{t}` occurs {} time(s) in p",
                    inner.kind.tag(),
                    pw.occurrence_count(t)
                )
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freegroup::Registry;
    use crate::presentation::parse_presentation;
    use crate::tower::build_tower;

    fn certified(text: &str) -> CertificateNode {
        let reg = Registry::new();
        build_tower(&parse_presentation(text, &reg).unwrap(), &reg)
    }

    #[test]
    fn torus_verifies() {
        assert!(verify_certificate(&certified("< a, b | a b a^-1 b^-1 >")).is_ok());
    }

    #[test]
    fn deleted_letter_is_caught() {
        let mut root = certified("< a, b | a b a^-1 b^-1 >");
        let NodeKind::Case1Hnn { data, .. } = &mut root.kind else {
            unreachable!()
        };
        let mut letters = data.rewritten.clone().into_letters();
        letters.remove(0);
        data.rewritten = Word::new(letters);
        let v = verify_certificate(&root);
        assert!(v.has("expansion mismatch"), "{v:?}");
    }

    #[test]
    fn decremented_bound_is_caught() {
        let mut root = certified("< u, v | u^2 v^3 >");
        root.bound -= 1;
        let v = verify_certificate(&root);
        assert!(v.has("bound arithmetic"));
        assert_eq!(v.violations.len(), 1);
    }

    #[test]
    fn leaf_rank_is_checked() {
        let mut root = certified("< a, b, c | 1 >");
        root.kind = NodeKind::FreeLeaf { rank: 2 };
        assert!(verify_certificate(&root).has("leaf shape"));
    }
}
