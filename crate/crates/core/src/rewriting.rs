//! Single decomposition steps: splitting off free factors, finding a
//! generator to eliminate or to use as a stable letter, rewriting over a
//! stable letter of exponent sum zero, and the embedding substitution used
//! when every exponent sum is nonzero.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::freegroup::{GeneratorId, Letter, Registry, Word};
use crate::presentation::{Presentation, PresentationError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RewriteError {
    #[error("`{0}` is not a generator of the presentation")]
    NotAGenerator(String),
    #[error("`{gen}` has exponent sum {sum} in the relator; a stable letter needs 0")]
    NonzeroExponentSum { gen: String, sum: i64 },
    #[error("`{gen}` has exponent sum 0 in the relator")]
    ZeroExponentSum { gen: String },
    #[error("`{gen}` occurs {count} time(s) in the relator; at least 2 are needed")]
    TooFewOccurrences { gen: String, count: usize },
    #[error("the relator is a power of `{0}` alone")]
    PurePower(String),
    #[error("the relator uses fewer than two distinct generators")]
    TooFewGenerators,
    #[error("the two embedding generators must differ")]
    SameGenerator,
    #[error(transparent)]
    Presentation(#[from] PresentationError),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// One entry of a rewriting table: `fresh` stands for `t^subscript base t^-subscript`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Renamed {
    pub fresh: GeneratorId,
    pub base: GeneratorId,
    pub subscript: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Case1Result {
    pub pivot_t: GeneratorId,
    pub pivot_b: GeneratorId,
    /// The word emitted by the scan, before any reduction.
    pub emitted: Word,
    /// `emitted`, freely and cyclically reduced.
    pub rewritten: Word,
    pub subscript_min: i64,
    pub subscript_max: i64,
    /// Ordered like `child.generators()`.
    pub renaming: Vec<Renamed>,
    pub child: Presentation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Case2Result {
    pub u: GeneratorId,
    pub v: GeneratorId,
    pub alpha: i64,
    pub beta: i64,
    pub fresh_t: GeneratorId,
    pub fresh_b: GeneratorId,
    pub image_relator: Word,
    pub embedded: Presentation,
}

/// Separates the generators that do not occur in the relator.
pub fn split_free_part(p: &Presentation) -> (Presentation, Vec<GeneratorId>) {
    let (used, free): (Vec<_>, Vec<_>) = p
        .generators()
        .iter()
        .cloned()
        .partition(|g| p.relator().occurrence_count(g) > 0);
    let core = Presentation::new_unnormalized(used, p.relator().clone());
    (core, free)
}

pub fn find_single_occurrence(p: &Presentation) -> Option<GeneratorId> {
    p.generators()
        .iter()
        .find(|g| p.relator().occurrence_count(g) == 1)
        .cloned()
}

pub fn find_zero_exponent(p: &Presentation) -> Option<GeneratorId> {
    zero_exponent_candidates(p).into_iter().next()
}

/// Every occurring generator with exponent sum zero, in declaration order.
pub fn zero_exponent_candidates(p: &Presentation) -> Vec<GeneratorId> {
    let r = p.relator();
    p.generators()
        .iter()
        .filter(|g| r.occurrence_count(g) > 0 && r.exponent_sum(g) == 0)
        .cloned()
        .collect()
}

/// Rewrites the relator over the conjugates `x_i = t^i x t^-i`.
///
/// The scan keeps the running exponent of `t` and emits `x_acc^{±1}` for
/// each non-`t` letter, so substituting `x_i ↦ t^i x t^-i` back into the
/// emitted word gives the relator exactly.
pub fn case1_rewrite(
    p: &Presentation,
    t: &GeneratorId,
    registry: &Registry,
) -> Result<Case1Result, RewriteError> {
    if p.position(t).is_none() {
        return Err(RewriteError::NotAGenerator(t.name().to_string()));
    }
    let r = p.relator();
    let sum = r.exponent_sum(t);
    if sum != 0 {
        return Err(RewriteError::NonzeroExponentSum {
            gen: t.name().to_string(),
            sum,
        });
    }
    let count = r.occurrence_count(t);
    if count < 2 {
        return Err(RewriteError::TooFewOccurrences {
            gen: t.name().to_string(),
            count,
        });
    }
    if count == r.len() {
        return Err(RewriteError::PurePower(t.name().to_string()));
    }

    let mut acc = 0i64;
    let mut scanned = Vec::with_capacity(r.len() - count);
    for letter in r.letters() {
        if &letter.gen == t {
            acc += letter.sign.value();
        } else {
            scanned.push((letter.gen.clone(), acc, letter.sign));
        }
    }

    // Fresh generators ordered by base declaration position, then subscript.
    let mut keys: BTreeMap<(usize, i64), GeneratorId> = BTreeMap::new();
    for (base, i, _) in &scanned {
        let pos = p.position(base).expect("relator letters are declared");
        keys.entry((pos, *i)).or_insert_with(|| base.clone());
    }
    let mut fresh: HashMap<(u64, i64), GeneratorId> = HashMap::new();
    let mut renaming = Vec::with_capacity(keys.len());
    for ((_, i), base) in &keys {
        let g = registry.subscripted(base, *i);
        fresh.insert((base.uid(), *i), g.clone());
        renaming.push(Renamed {
            fresh: g,
            base: base.clone(),
            subscript: *i,
        });
    }

    let emitted: Word = scanned
        .iter()
        .map(|(base, i, sign)| Letter::new(fresh[&(base.uid(), *i)].clone(), *sign))
        .collect();
    let (rewritten, _) = emitted.cyclic_reduce();
    if rewritten.is_empty() {
        return Err(RewriteError::Internal(
            "rewritten relator is empty".to_string(),
        ));
    }
    if rewritten.len() + 2 > r.len() {
        return Err(RewriteError::Internal(format!(
            "rewritten relator has length {} > {} - 2",
            rewritten.len(),
            r.len()
        )));
    }

    let pivot_b = scanned[0].0.clone();
    let family: Vec<i64> = rewritten
        .letters()
        .iter()
        .filter_map(|l| renaming.iter().find(|e| e.fresh == l.gen))
        .filter(|e| e.base == pivot_b)
        .map(|e| e.subscript)
        .collect();
    let (Some(&subscript_min), Some(&subscript_max)) = (family.iter().min(), family.iter().max())
    else {
        return Err(RewriteError::Internal(format!(
            "no `{}` letter survives rewriting",
            pivot_b.name()
        )));
    };

    renaming.retain(|e| rewritten.occurrence_count(&e.fresh) > 0);
    let child_gens = renaming.iter().map(|e| e.fresh.clone()).collect();
    let child = Presentation::new(child_gens, rewritten.clone())?;

    Ok(Case1Result {
        pivot_t: t.clone(),
        pivot_b,
        emitted,
        rewritten,
        subscript_min,
        subscript_max,
        renaming,
        child,
    })
}

/// Ordered pairs of distinct occurring generators, all eligible for the
/// embedding step.
pub fn case2_pairs(p: &Presentation) -> Vec<(GeneratorId, GeneratorId)> {
    let letters = p.letters_of();
    let mut out = Vec::new();
    for u in &letters {
        for v in &letters {
            if u != v {
                out.push((u.clone(), v.clone()));
            }
        }
    }
    out
}

/// Picks `(u, v)` minimizing `|α·β|`, ties broken by declaration order.
pub fn choose_case2_pair(p: &Presentation) -> Result<(GeneratorId, GeneratorId), RewriteError> {
    let r = p.relator();
    case2_pairs(p)
        .into_iter()
        .min_by_key(|(u, v)| (r.exponent_sum(u) * r.exponent_sum(v)).unsigned_abs())
        .ok_or(RewriteError::TooFewGenerators)
}

/// Smallest `k ≥ 1` such that `t#k` and `b#k` are unused in `p`.
fn fresh_suffix(p: &Presentation) -> usize {
    (1..)
        .find(|k| {
            p.generator_named(&format!("t#{k}")).is_none()
                && p.generator_named(&format!("b#{k}")).is_none()
        })
        .expect("finitely many generators")
}

/// Embeds `< S | r >` into `< t, b, S \ {u, v} | p >` via
/// `u ↦ b t^-β`, `v ↦ t^α`, with `p` the cyclic reduction of the image of `r`.
pub fn case2_substitute(
    p: &Presentation,
    u: &GeneratorId,
    v: &GeneratorId,
    registry: &Registry,
) -> Result<Case2Result, RewriteError> {
    for g in [u, v] {
        if p.position(g).is_none() {
            return Err(RewriteError::NotAGenerator(g.name().to_string()));
        }
    }
    if u == v {
        return Err(RewriteError::SameGenerator);
    }
    let r = p.relator();
    let alpha = r.exponent_sum(u);
    let beta = r.exponent_sum(v);
    for (g, sum) in [(u, alpha), (v, beta)] {
        if sum == 0 {
            return Err(RewriteError::ZeroExponentSum {
                gen: g.name().to_string(),
            });
        }
    }
    for g in p.letters_of() {
        let count = r.occurrence_count(&g);
        if count < 2 {
            return Err(RewriteError::TooFewOccurrences {
                gen: g.name().to_string(),
                count,
            });
        }
    }

    let k = fresh_suffix(p);
    let reason = format!("embedding {u} -> b t^{}, {v} -> t^{alpha}", -beta);
    let t = registry.fresh(format!("t#{k}"), reason.clone());
    let b = registry.fresh(format!("b#{k}"), reason);

    let mut images: HashMap<GeneratorId, Word> = p
        .generators()
        .iter()
        .map(|g| (g.clone(), g.pow(1)))
        .collect();
    images.insert(u.clone(), b.pow(1).concat(&t.pow(-beta)));
    images.insert(v.clone(), t.pow(alpha));
    let image = r
        .substitute(&images)
        .map_err(|e| RewriteError::Internal(e.to_string()))?;
    let (image_relator, _) = image.cyclic_reduce();

    if image_relator.exponent_sum(&t) != 0 {
        return Err(RewriteError::Internal(format!(
            "image relator has t-exponent sum {}",
            image_relator.exponent_sum(&t)
        )));
    }
    if image_relator.occurrence_count(&b) == 0 {
        return Err(RewriteError::Internal(
            "b vanished from the image relator".to_string(),
        ));
    }

    let mut gens = vec![t.clone(), b.clone()];
    gens.extend(p.generators().iter().filter(|g| *g != u && *g != v).cloned());
    let embedded = Presentation::new(gens, image_relator.clone())?;

    Ok(Case2Result {
        u: u.clone(),
        v: v.clone(),
        alpha,
        beta,
        fresh_t: t,
        fresh_b: b,
        image_relator,
        embedded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::parse_presentation;

    fn names(gens: &[GeneratorId]) -> Vec<String> {
        gens.iter().map(|g| g.name().to_string()).collect()
    }

    fn gen(p: &Presentation, name: &str) -> GeneratorId {
        p.generator_named(name).unwrap().clone()
    }

    #[test]
    fn split_free_part_examples() {
        let reg = Registry::new();
        let p = parse_presentation("< a, b, c | a b a^-1 b^-1 >", &reg).unwrap();
        let (core, free) = split_free_part(&p);
        assert_eq!(names(core.generators()), ["a", "b"]);
        assert_eq!(core.relator(), p.relator());
        assert_eq!(names(&free), ["c"]);

        let p = parse_presentation("< a, b | [a,b] >", &reg).unwrap();
        let (core, free) = split_free_part(&p);
        assert_eq!(core, p);
        assert!(free.is_empty());

        let p = parse_presentation("< a, b, c | 1 >", &reg).unwrap();
        let (core, free) = split_free_part(&p);
        assert_eq!(core.rank(), 0);
        assert_eq!(names(&free), ["a", "b", "c"]);
    }

    #[test]
    fn guard_searches() {
        let reg = Registry::new();
        let p = |s| parse_presentation(s, &reg).unwrap();
        assert_eq!(find_single_occurrence(&p("< a, b | a b a >")).unwrap().name(), "b");
        assert!(find_single_occurrence(&p("< a, b | [a,b] >")).is_none());
        assert_eq!(find_single_occurrence(&p("< u, v | u u v >")).unwrap().name(), "v");

        assert_eq!(find_zero_exponent(&p("< t, b | t b t^-1 b^-1 >")).unwrap().name(), "t");
        assert!(find_zero_exponent(&p("< u, v | u^2 v^3 >")).is_none());
        assert_eq!(find_zero_exponent(&p("< a, t | t a^2 t^-1 a^-3 >")).unwrap().name(), "t");
    }

    fn check_case1(text: &str, s: &str, m: i64, big_m: i64) -> Case1Result {
        let reg = Registry::new();
        let p = parse_presentation(text, &reg).unwrap();
        let t = gen(&p, "t");
        let res = case1_rewrite(&p, &t, &reg).unwrap();
        assert_eq!(res.rewritten.to_string(), s);
        assert_eq!((res.subscript_min, res.subscript_max), (m, big_m));
        assert!(res.rewritten.len() + 2 <= p.relator_len());
        assert_eq!(res.pivot_b.name(), "b");
        res
    }

    #[test]
    fn case1_commutator() {
        let res = check_case1("< t, b | t b t^-1 b^-1 >", "b@1 b@0^-1", 0, 1);
        assert_eq!(res.child.to_string(), "< b@0, b@1 | b@1 b@0^-1 >");
    }

    #[test]
    fn case1_trefoil_image() {
        check_case1("< t, b | b t^-3 b t^3 >", "b@0 b@-3", -3, 0);
    }

    #[test]
    fn case1_double_conjugate() {
        check_case1("< t, b | t t b t^-1 t^-1 b >", "b@2 b@0", 0, 2);
    }

    #[test]
    fn case1_emitted_is_already_reduced() {
        let reg = Registry::new();
        let p = parse_presentation("< t, b, c | t b c t^-2 b^-1 t c^2 t^-1 b t >", &reg).unwrap();
        let t = gen(&p, "t");
        let res = case1_rewrite(&p, &t, &reg).unwrap();
        assert_eq!(res.emitted, res.rewritten);
        assert_eq!(res.rewritten.len(), p.relator_len() - p.relator().occurrence_count(&t));
    }

    #[test]
    fn case1_precondition_errors() {
        let reg = Registry::new();
        let p = parse_presentation("< u, v | u^2 v^3 >", &reg).unwrap();
        assert!(matches!(
            case1_rewrite(&p, &gen(&p, "u"), &reg),
            Err(RewriteError::NonzeroExponentSum { sum: 2, .. })
        ));
        let q = parse_presentation("< a | a^2 >", &reg).unwrap();
        let other = reg.declare("z");
        assert!(matches!(
            case1_rewrite(&q, &other, &reg),
            Err(RewriteError::NotAGenerator(_))
        ));
        let q = parse_presentation("< a, t | a >", &reg).unwrap();
        assert!(matches!(
            case1_rewrite(&q, &gen(&q, "t"), &reg),
            Err(RewriteError::TooFewOccurrences { count: 0, .. })
        ));
    }

    #[test]
    fn case2_pair_choice() {
        let reg = Registry::new();
        let p = parse_presentation("< u, v | u^2 v^3 >", &reg).unwrap();
        let (u, v) = choose_case2_pair(&p).unwrap();
        assert_eq!((u.name(), v.name()), ("u", "v"));

        let p = parse_presentation("< a, b, c | a b c a b c >", &reg).unwrap();
        let (u, v) = choose_case2_pair(&p).unwrap();
        assert_eq!((u.name(), v.name()), ("a", "b"));

        let p = parse_presentation("< a, b, c | a^3 b^2 c b c >", &reg).unwrap();
        let (u, v) = choose_case2_pair(&p).unwrap();
        assert_eq!((u.name(), v.name()), ("a", "c"));

        let p = parse_presentation("< a, b | a^3 >", &reg).unwrap();
        assert_eq!(choose_case2_pair(&p), Err(RewriteError::TooFewGenerators));
    }

    #[test]
    fn case2_trefoil() {
        let reg = Registry::new();
        let p = parse_presentation("< u, v | u^2 v^3 >", &reg).unwrap();
        let res = case2_substitute(&p, &gen(&p, "u"), &gen(&p, "v"), &reg).unwrap();
        assert_eq!((res.alpha, res.beta), (2, 3));
        assert_eq!(res.image_relator.to_string(), "b#1 t#1^-3 b#1 t#1^3");
        assert_eq!(res.image_relator.len(), 8);
        assert_eq!(res.image_relator.exponent_sum(&res.fresh_t), 0);
        assert_eq!(res.embedded.to_string(), "< t#1, b#1 | b#1 t#1^-3 b#1 t#1^3 >");
    }

    #[test]
    fn case2_t_can_vanish() {
        let reg = Registry::new();
        let p = parse_presentation("< u, v | u v u v >", &reg).unwrap();
        let res = case2_substitute(&p, &gen(&p, "u"), &gen(&p, "v"), &reg).unwrap();
        assert_eq!(res.image_relator.to_string(), "b#1^2");
        assert_eq!(res.image_relator.occurrence_count(&res.fresh_t), 0);
    }

    #[test]
    fn case2_fresh_names_avoid_clashes() {
        let reg = Registry::new();
        let raw = crate::presentation::parse_stored_presentation(
            "< t#1, b#1, c | t#1^2 b#1^2 c^2 >",
            &reg,
            &HashMap::new(),
        )
        .unwrap();
        let res = case2_substitute(&raw, &gen(&raw, "t#1"), &gen(&raw, "b#1"), &reg).unwrap();
        assert_eq!(res.fresh_t.name(), "t#2");
        assert_eq!(res.fresh_b.name(), "b#2");
    }

    #[test]
    fn case2_precondition_errors() {
        let reg = Registry::new();
        let p = parse_presentation("< u, v | u v^2 >", &reg).unwrap();
        assert!(matches!(
            case2_substitute(&p, &gen(&p, "u"), &gen(&p, "v"), &reg),
            Err(RewriteError::TooFewOccurrences { count: 1, .. })
        ));
        let p = parse_presentation("< u, v | u^2 v u^-2 v >", &reg).unwrap();
        assert!(matches!(
            case2_substitute(&p, &gen(&p, "u"), &gen(&p, "v"), &reg),
            Err(RewriteError::ZeroExponentSum { .. })
        ));
        assert_eq!(
            case2_substitute(&p, &gen(&p, "u"), &gen(&p, "u"), &reg),
            Err(RewriteError::SameGenerator)
        );
    }
}
