//! The recursive decomposition and its bound calculus.
//!
//! Guards are tried in a fixed order; each one establishes the precondition
//! of the next:
//!
//! 1. empty relator: free group on all generators
//! 2. some generator absent from the relator: split off a free factor
//! 3. relator of length 1: free group on the remaining generators
//! 4. a generator occurring exactly once: eliminate it, free group remains
//! 5. relator `a^n`, `|n| ≥ 2`: finite cyclic group
//! 6. a generator with exponent sum 0: HNN extension over a shorter relator
//! 7. otherwise embed, then rewrite over the fresh stable letter
//!
//! Bounds: free of rank ≥ 1 is 1, trivial and finite groups are 0, an HNN
//! extension adds 1, a free product takes the max with 1, a subgroup is
//! bounded by its overgroup.

use std::collections::HashMap;

use crate::freegroup::{GeneratorId, Registry};
use crate::presentation::Presentation;
use crate::rewriting::{
    case1_rewrite, case2_pairs, case2_substitute, choose_case2_pair, find_single_occurrence,
    split_free_part, zero_exponent_candidates, Case1Result, Case2Result,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeKind {
    FreeSplit {
        free_generators: Vec<GeneratorId>,
        split_off_rank: usize,
        core_child: Box<CertificateNode>,
    },
    SingleElim {
        eliminated: GeneratorId,
        resulting_rank: usize,
    },
    Case1Hnn {
        data: Case1Result,
        child: Box<CertificateNode>,
    },
    Case2Embed {
        data: Case2Result,
        inner: Box<CertificateNode>,
    },
    FreeLeaf {
        rank: usize,
    },
    CyclicLeaf {
        order: u64,
    },
}

impl NodeKind {
    pub fn tag(&self) -> &'static str {
        match self {
            NodeKind::FreeSplit { .. } => "free_split",
            NodeKind::SingleElim { .. } => "single_elim",
            NodeKind::Case1Hnn { .. } => "case1_hnn",
            NodeKind::Case2Embed { .. } => "case2_embed",
            NodeKind::FreeLeaf { .. } => "free_leaf",
            NodeKind::CyclicLeaf { .. } => "cyclic_leaf",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateNode {
    pub input: Presentation,
    pub bound: u32,
    pub kind: NodeKind,
}

impl CertificateNode {
    /// Makes a node, filling in its bound from the children's stored bounds.
    pub fn new(input: Presentation, kind: NodeKind) -> Self {
        let mut node = CertificateNode {
            input,
            bound: 0,
            kind,
        };
        node.bound = local_bound(&node);
        node
    }

    /// The bound this node should carry given its children's stored bounds.
    pub fn rule_bound(&self) -> u32 {
        local_bound(self)
    }

    pub fn child(&self) -> Option<&CertificateNode> {
        match &self.kind {
            NodeKind::FreeSplit { core_child, .. } => Some(core_child),
            NodeKind::Case1Hnn { child, .. } => Some(child),
            NodeKind::Case2Embed { inner, .. } => Some(inner),
            _ => None,
        }
    }

    pub fn child_mut(&mut self) -> Option<&mut CertificateNode> {
        match &mut self.kind {
            NodeKind::FreeSplit { core_child, .. } => Some(core_child),
            NodeKind::Case1Hnn { child, .. } => Some(child),
            NodeKind::Case2Embed { inner, .. } => Some(inner),
            _ => None,
        }
    }

    /// Nodes from this one down to the leaf. Every node has at most one child.
    pub fn path(&self) -> impl Iterator<Item = &CertificateNode> {
        std::iter::successors(Some(self), |n| n.child())
    }

    pub fn node_count(&self) -> usize {
        self.path().count()
    }
}

fn free_bound(rank: usize) -> u32 {
    u32::from(rank > 0)
}

/// The bound of `node` computed from the stored bounds of its children.
fn local_bound(node: &CertificateNode) -> u32 {
    match &node.kind {
        NodeKind::FreeLeaf { rank } => free_bound(*rank),
        NodeKind::SingleElim { resulting_rank, .. } => free_bound(*resulting_rank),
        NodeKind::CyclicLeaf { .. } => 0,
        NodeKind::FreeSplit {
            split_off_rank,
            core_child,
            ..
        } => {
            if *split_off_rank == 0 {
                core_child.bound
            } else {
                core_child.bound.max(1)
            }
        }
        NodeKind::Case1Hnn { child, .. } => 1 + child.bound,
        NodeKind::Case2Embed { inner, .. } => inner.bound,
    }
}

/// Recomputes the bound of a tree from its leaves, ignoring stored bounds.
pub fn bound_of(node: &CertificateNode) -> u32 {
    match &node.kind {
        NodeKind::FreeLeaf { rank } => free_bound(*rank),
        NodeKind::SingleElim { resulting_rank, .. } => free_bound(*resulting_rank),
        NodeKind::CyclicLeaf { .. } => 0,
        NodeKind::FreeSplit {
            split_off_rank,
            core_child,
            ..
        } => {
            let inner = bound_of(core_child);
            if *split_off_rank == 0 {
                inner
            } else {
                inner.max(1)
            }
        }
        NodeKind::Case1Hnn { child, .. } => 1 + bound_of(child),
        NodeKind::Case2Embed { inner, .. } => bound_of(inner),
    }
}

pub fn ceil_half(n: usize) -> usize {
    n.div_ceil(2)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundReport {
    pub relator_len: usize,
    pub paper_bound: usize,
    pub tower_bound: u32,
    pub hnn_steps: usize,
    pub node_count: usize,
}

impl BoundReport {
    pub fn of(root: &CertificateNode) -> Self {
        let relator_len = root.input.relator_len();
        BoundReport {
            relator_len,
            paper_bound: ceil_half(relator_len),
            tower_bound: bound_of(root),
            hnn_steps: root
                .path()
                .filter(|n| matches!(n.kind, NodeKind::Case1Hnn { .. }))
                .count(),
            node_count: root.node_count(),
        }
    }
}

/// Builds the certificate tree with the default choices: first zero-exponent
/// generator in declaration order, and the embedding pair minimizing `|α·β|`.
pub fn build_tower(p: &Presentation, registry: &Registry) -> CertificateNode {
    TowerBuilder::new(registry).build(p)
}

/// Like [`build_tower`], but tries every stable-letter and embedding-pair
/// choice and keeps one with the smallest bound. Exponential in the worst case.
pub fn build_best_tower(p: &Presentation, registry: &Registry) -> CertificateNode {
    TowerBuilder::exhaustive(registry).build(p)
}

enum Step {
    Case1(GeneratorId),
    Case2(GeneratorId, GeneratorId),
}

pub struct TowerBuilder<'r> {
    registry: &'r Registry,
    exhaustive: bool,
    memo: HashMap<String, u32>,
}

impl<'r> TowerBuilder<'r> {
    pub fn new(registry: &'r Registry) -> Self {
        Self {
            registry,
            exhaustive: false,
            memo: HashMap::new(),
        }
    }

    pub fn exhaustive(registry: &'r Registry) -> Self {
        Self {
            exhaustive: true,
            ..Self::new(registry)
        }
    }

    pub fn build(&mut self, p: &Presentation) -> CertificateNode {
        let r = p.relator();
        if r.is_empty() {
            return CertificateNode::new(p.clone(), NodeKind::FreeLeaf { rank: p.rank() });
        }
        let (core, free) = split_free_part(p);
        if !free.is_empty() {
            let core_child = Box::new(self.build(&core));
            return CertificateNode::new(
                p.clone(),
                NodeKind::FreeSplit {
                    split_off_rank: free.len(),
                    free_generators: free,
                    core_child,
                },
            );
        }
        if r.len() == 1 {
            return CertificateNode::new(p.clone(), NodeKind::FreeLeaf { rank: p.rank() - 1 });
        }
        if let Some(g) = find_single_occurrence(p) {
            return CertificateNode::new(
                p.clone(),
                NodeKind::SingleElim {
                    eliminated: g,
                    resulting_rank: p.rank() - 1,
                },
            );
        }
        if p.rank() == 1 {
            return CertificateNode::new(
                p.clone(),
                NodeKind::CyclicLeaf {
                    order: r.len() as u64,
                },
            );
        }
        match self.choose(p) {
            Step::Case1(t) => self.case1_node(p, &t),
            Step::Case2(u, v) => self.case2_node(p, &u, &v),
        }
    }

    fn case1_node(&mut self, p: &Presentation, t: &GeneratorId) -> CertificateNode {
        let data = case1_rewrite(p, t, self.registry)
            .expect("guards establish the stable-letter preconditions");
        let child = Box::new(self.build(&data.child));
        CertificateNode::new(p.clone(), NodeKind::Case1Hnn { data, child })
    }

    fn case2_node(&mut self, p: &Presentation, u: &GeneratorId, v: &GeneratorId) -> CertificateNode {
        let data = case2_substitute(p, u, v, self.registry)
            .expect("guards establish the embedding preconditions");
        let c = &data.embedded;
        let inner = if c.relator().occurrence_count(&data.fresh_t) == 0 {
            // t is a free factor of the embedding target
            let (core, free) = split_free_part(c);
            let core_child = Box::new(self.build(&core));
            CertificateNode::new(
                c.clone(),
                NodeKind::FreeSplit {
                    split_off_rank: free.len(),
                    free_generators: free,
                    core_child,
                },
            )
        } else {
            self.case1_node(c, &data.fresh_t)
        };
        CertificateNode::new(
            p.clone(),
            NodeKind::Case2Embed {
                data,
                inner: Box::new(inner),
            },
        )
    }

    fn choose(&mut self, p: &Presentation) -> Step {
        let zero = zero_exponent_candidates(p);
        if !self.exhaustive {
            return match zero.into_iter().next() {
                Some(t) => Step::Case1(t),
                None => {
                    let (u, v) = choose_case2_pair(p).expect("at least two generators occur");
                    Step::Case2(u, v)
                }
            };
        }
        let options: Vec<Step> = if zero.is_empty() {
            case2_pairs(p)
                .into_iter()
                .map(|(u, v)| Step::Case2(u, v))
                .collect()
        } else {
            zero.into_iter().map(Step::Case1).collect()
        };
        let mut best: Option<(u32, Step)> = None;
        for step in options {
            let bound = self.step_bound(p, &step);
            if best.as_ref().is_none_or(|(b, _)| bound < *b) {
                best = Some((bound, step));
            }
        }
        best.expect("at least one option").1
    }

    fn step_bound(&mut self, p: &Presentation, step: &Step) -> u32 {
        match step {
            Step::Case1(t) => {
                let data = case1_rewrite(p, t, self.registry)
                    .expect("guards establish the stable-letter preconditions");
                1 + self.best_bound(&data.child)
            }
            Step::Case2(u, v) => {
                let data = case2_substitute(p, u, v, self.registry)
                    .expect("guards establish the embedding preconditions");
                let c = &data.embedded;
                if c.relator().occurrence_count(&data.fresh_t) == 0 {
                    let (core, _) = split_free_part(c);
                    self.best_bound(&core).max(1)
                } else {
                    let inner = case1_rewrite(c, &data.fresh_t, self.registry)
                        .expect("the fresh stable letter has exponent sum zero");
                    1 + self.best_bound(&inner.child)
                }
            }
        }
    }

    /// Best achievable bound for `p`, memoized on the printed presentation.
    pub fn best_bound(&mut self, p: &Presentation) -> u32 {
        let key = p.to_string();
        if let Some(b) = self.memo.get(&key) {
            return *b;
        }
        let b = self.build(p).bound;
        self.memo.insert(key, b);
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::parse_presentation;

    fn tower(text: &str) -> CertificateNode {
        let reg = Registry::new();
        build_tower(&parse_presentation(text, &reg).unwrap(), &reg)
    }

    fn kinds(root: &CertificateNode) -> Vec<&'static str> {
        root.path().map(|n| n.kind.tag()).collect()
    }

    #[test]
    fn ceil_half_examples() {
        assert_eq!(ceil_half(5), 3);
        assert_eq!(ceil_half(4), 2);
        assert_eq!(ceil_half(0), 0);
    }

    #[test]
    fn torus() {
        let root = tower("< a, b | a b a^-1 b^-1 >");
        assert_eq!(kinds(&root), ["case1_hnn", "single_elim"]);
        let NodeKind::Case1Hnn { data, child } = &root.kind else {
            unreachable!()
        };
        assert_eq!(data.pivot_t.name(), "a");
        assert_eq!(data.rewritten.len(), 2);
        assert_eq!(child.kind, NodeKind::SingleElim {
            eliminated: child.input.generators()[0].clone(),
            resulting_rank: 1,
        });
        let report = BoundReport::of(&root);
        assert_eq!((report.paper_bound, report.tower_bound), (2, 2));
        assert_eq!(report.hnn_steps, 1);
    }

    #[test]
    fn trefoil() {
        let root = tower("< u, v | u^2 v^3 >");
        assert_eq!(kinds(&root), ["case2_embed", "case1_hnn", "single_elim"]);
        let NodeKind::Case2Embed { data, inner } = &root.kind else {
            unreachable!()
        };
        assert_eq!((data.alpha, data.beta), (2, 3));
        let NodeKind::Case1Hnn { data: c1, .. } = &inner.kind else {
            unreachable!()
        };
        assert_eq!(c1.rewritten.to_string(), "b#1@0 b#1@-3");
        let report = BoundReport::of(&root);
        assert_eq!((report.paper_bound, report.tower_bound), (3, 2));
    }

    #[test]
    fn split_then_cyclic() {
        let root = tower("< a, b | a^3 >");
        assert_eq!(kinds(&root), ["free_split", "cyclic_leaf"]);
        assert!(matches!(root.kind, NodeKind::FreeSplit { split_off_rank: 1, .. }));
        assert_eq!(root.child().unwrap().kind, NodeKind::CyclicLeaf { order: 3 });
        assert_eq!(bound_of(&root), 1);
        assert_eq!(BoundReport::of(&root).paper_bound, 2);
    }

    #[test]
    fn leaves() {
        assert_eq!(tower("< a, b, c | 1 >").kind, NodeKind::FreeLeaf { rank: 3 });
        assert_eq!(tower("< a | a >").kind, NodeKind::FreeLeaf { rank: 0 });
        assert_eq!(tower("< a | a >").bound, 0);
        assert_eq!(tower("< a, b, c | 1 >").bound, 1);
        assert_eq!(kinds(&tower("< a, b | a b^2 >")), ["single_elim"]);
    }

    #[test]
    fn embedding_without_stable_letter() {
        let root = tower("< u, v | u v u v >");
        assert_eq!(kinds(&root), ["case2_embed", "free_split", "cyclic_leaf"]);
        assert_eq!(root.bound, 1);
    }

    #[test]
    fn bound_calculus() {
        let reg = Registry::new();
        let p = parse_presentation("< a, b, c | 1 >", &reg).unwrap();
        let leaf = CertificateNode::new(p.clone(), NodeKind::FreeLeaf { rank: 3 });
        assert_eq!(bound_of(&leaf), 1);

        let q = parse_presentation("< a, b | a^3 >", &reg).unwrap();
        let (core, free) = split_free_part(&q);
        let cyclic = CertificateNode::new(core, NodeKind::CyclicLeaf { order: 3 });
        let split = CertificateNode::new(
            q,
            NodeKind::FreeSplit {
                split_off_rank: 2,
                free_generators: free,
                core_child: Box::new(cyclic),
            },
        );
        assert_eq!(bound_of(&split), 1);
    }

    #[test]
    fn hnn_over_rank_one() {
        let root = tower("< t, b | t b t^-1 b^-1 >");
        let NodeKind::Case1Hnn { child, .. } = &root.kind else {
            unreachable!()
        };
        assert_eq!(bound_of(child), 1);
        assert_eq!(bound_of(&root), 2);
    }

    #[test]
    fn exhaustive_never_worse() {
        let reg = Registry::new();
        for text in [
            "< a, b | a^2 b^2 a^-1 b^-3 >",
            "< a, b, c | a b c a^-1 b^-1 c^-1 >",
            "< a, b | a^2 b^3 a^2 b^3 >",
            "< a, b, c, d | [a,b][c,d] >",
        ] {
            let p = parse_presentation(text, &reg).unwrap();
            let default = build_tower(&p, &reg);
            let best = build_best_tower(&p, &reg);
            assert!(best.bound <= default.bound, "{text}");
            assert_eq!(best.bound, TowerBuilder::exhaustive(&reg).best_bound(&p));
        }
    }
}
