//! Certificate documents, tree rendering and batch processing.
//!
//! A certificate is a JSON document with `"schema_version": 1`. Every node
//! records its kind, the presentation it decomposes (in the presentation
//! grammar, extended with derived generator names), the kind-specific data
//! and its bound. Rewriting tables are arrays of `[fresh, base, subscript]`.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::freegroup::{GeneratorId, Origin, Registry};
use crate::presentation::{
    parse_presentation, parse_stored_presentation, parse_word, Identifiers, ParseError,
};
use crate::rewriting::{Case1Result, Case2Result, Renamed};
use crate::tower::{build_best_tower, build_tower, BoundReport, CertificateNode, NodeKind};
use crate::verify::verify_certificate;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DocError {
    #[error("malformed certificate document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema_version {0}")]
    SchemaVersion(u32),
    #[error("in {context}: {source}")]
    Parse {
        context: &'static str,
        source: ParseError,
    },
    #[error("in {context}: unknown generator `{name}`")]
    UnknownName { context: &'static str, name: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub relator_length: usize,
    pub paper_bound: usize,
    pub tower_bound: u32,
    pub hnn_steps: usize,
    pub node_count: usize,
}

impl From<&BoundReport> for ReportDoc {
    fn from(r: &BoundReport) -> Self {
        ReportDoc {
            relator_length: r.relator_len,
            paper_bound: r.paper_bound,
            tower_bound: r.tower_bound,
            hnn_steps: r.hnn_steps,
            node_count: r.node_count,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub schema_version: u32,
    pub presentation: String,
    pub report: ReportDoc,
    pub root: NodeDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NodeDoc {
    FreeSplit {
        input: String,
        bound: u32,
        split_off_rank: usize,
        free_generators: Vec<String>,
        core_child: Box<NodeDoc>,
    },
    SingleElim {
        input: String,
        bound: u32,
        eliminated: String,
        resulting_rank: usize,
    },
    #[serde(rename = "case1_hnn")]
    Case1Hnn {
        input: String,
        bound: u32,
        pivot_t: String,
        pivot_b: String,
        s: String,
        m: i64,
        #[serde(rename = "M")]
        big_m: i64,
        renaming: Vec<(String, String, i64)>,
        child: Box<NodeDoc>,
    },
    #[serde(rename = "case2_embed")]
    Case2Embed {
        input: String,
        bound: u32,
        u: String,
        v: String,
        alpha: i64,
        beta: i64,
        t: String,
        b: String,
        p: String,
        embedded: String,
        inner: Box<NodeDoc>,
    },
    FreeLeaf {
        input: String,
        bound: u32,
        rank: usize,
    },
    CyclicLeaf {
        input: String,
        bound: u32,
        order: u64,
    },
}

fn names(gens: &[GeneratorId]) -> Vec<String> {
    gens.iter().map(|g| g.name().to_string()).collect()
}

pub fn node_to_doc(node: &CertificateNode) -> NodeDoc {
    let input = node.input.to_string();
    let bound = node.bound;
    match &node.kind {
        NodeKind::FreeSplit {
            free_generators,
            split_off_rank,
            core_child,
        } => NodeDoc::FreeSplit {
            input,
            bound,
            split_off_rank: *split_off_rank,
            free_generators: names(free_generators),
            core_child: Box::new(node_to_doc(core_child)),
        },
        NodeKind::SingleElim {
            eliminated,
            resulting_rank,
        } => NodeDoc::SingleElim {
            input,
            bound,
            eliminated: eliminated.name().to_string(),
            resulting_rank: *resulting_rank,
        },
        NodeKind::Case1Hnn { data, child } => NodeDoc::Case1Hnn {
            input,
            bound,
            pivot_t: data.pivot_t.name().to_string(),
            pivot_b: data.pivot_b.name().to_string(),
            s: data.rewritten.to_string(),
            m: data.subscript_min,
            big_m: data.subscript_max,
            renaming: data
                .renaming
                .iter()
                .map(|e| (e.fresh.name().to_string(), e.base.name().to_string(), e.subscript))
                .collect(),
            child: Box::new(node_to_doc(child)),
        },
        NodeKind::Case2Embed { data, inner } => NodeDoc::Case2Embed {
            input,
            bound,
            u: data.u.name().to_string(),
            v: data.v.name().to_string(),
            alpha: data.alpha,
            beta: data.beta,
            t: data.fresh_t.name().to_string(),
            b: data.fresh_b.name().to_string(),
            p: data.image_relator.to_string(),
            embedded: data.embedded.to_string(),
            inner: Box::new(node_to_doc(inner)),
        },
        NodeKind::FreeLeaf { rank } => NodeDoc::FreeLeaf {
            input,
            bound,
            rank: *rank,
        },
        NodeKind::CyclicLeaf { order } => NodeDoc::CyclicLeaf {
            input,
            bound,
            order: *order,
        },
    }
}

pub fn certificate_doc(root: &CertificateNode) -> CertificateDoc {
    CertificateDoc {
        schema_version: SCHEMA_VERSION,
        presentation: root.input.to_string(),
        report: ReportDoc::from(&BoundReport::of(root)),
        root: node_to_doc(root),
    }
}

/// Serializes a certificate tree. Output is deterministic for a given tree.
pub fn emit_certificate(root: &CertificateNode) -> String {
    serde_json::to_string_pretty(&certificate_doc(root)).expect("plain data serializes")
}

type Scope = HashMap<String, GeneratorId>;

fn lookup(scope: &Scope, name: &str, context: &'static str) -> Result<GeneratorId, DocError> {
    scope.get(name).cloned().ok_or_else(|| DocError::UnknownName {
        context,
        name: name.to_string(),
    })
}

fn parse_in(
    text: &str,
    registry: &Registry,
    scope: &Scope,
    context: &'static str,
) -> Result<crate::presentation::Presentation, DocError> {
    parse_stored_presentation(text, registry, scope).map_err(|source| DocError::Parse { context, source })
}

fn word_in(text: &str, scope: &Scope, context: &'static str) -> Result<crate::freegroup::Word, DocError> {
    parse_word(text, scope, Identifiers::Extended).map_err(|source| DocError::Parse { context, source })
}

/// Rebuilds a tree from a node document. Names in `inherited` denote the same
/// generators as in the parent node.
pub fn node_from_doc(
    doc: &NodeDoc,
    registry: &Registry,
    inherited: &Scope,
) -> Result<CertificateNode, DocError> {
    let (input_text, bound) = match doc {
        NodeDoc::FreeSplit { input, bound, .. }
        | NodeDoc::SingleElim { input, bound, .. }
        | NodeDoc::Case1Hnn { input, bound, .. }
        | NodeDoc::Case2Embed { input, bound, .. }
        | NodeDoc::FreeLeaf { input, bound, .. }
        | NodeDoc::CyclicLeaf { input, bound, .. } => (input, *bound),
    };
    let input = parse_in(input_text, registry, inherited, "node input")?;
    let local = input.name_scope();

    let kind = match doc {
        NodeDoc::FreeSplit {
            split_off_rank,
            free_generators,
            core_child,
            ..
        } => NodeKind::FreeSplit {
            free_generators: free_generators
                .iter()
                .map(|n| lookup(&local, n, "free_split generators"))
                .collect::<Result<_, _>>()?,
            split_off_rank: *split_off_rank,
            core_child: Box::new(node_from_doc(core_child, registry, &local)?),
        },
        NodeDoc::SingleElim {
            eliminated,
            resulting_rank,
            ..
        } => NodeKind::SingleElim {
            eliminated: lookup(&local, eliminated, "single_elim")?,
            resulting_rank: *resulting_rank,
        },
        NodeDoc::Case1Hnn {
            pivot_t,
            pivot_b,
            s,
            m,
            big_m,
            renaming,
            child,
            ..
        } => {
            let pivot_t = lookup(&local, pivot_t, "case1_hnn pivot_t")?;
            let pivot_b = lookup(&local, pivot_b, "case1_hnn pivot_b")?;
            let mut table = Vec::with_capacity(renaming.len());
            let mut fresh_scope = Scope::new();
            for (fresh, base, subscript) in renaming {
                let base = lookup(&local, base, "case1_hnn renaming")?;
                let g = registry.with_origin(
                    fresh.clone(),
                    Origin::Subscripted {
                        base: base.clone(),
                        subscript: *subscript,
                    },
                );
                fresh_scope.insert(fresh.clone(), g.clone());
                table.push(Renamed {
                    fresh: g,
                    base,
                    subscript: *subscript,
                });
            }
            let rewritten = word_in(s, &fresh_scope, "case1_hnn s")?;
            let child = node_from_doc(child, registry, &fresh_scope)?;
            NodeKind::Case1Hnn {
                data: Case1Result {
                    pivot_t,
                    pivot_b,
                    emitted: rewritten.clone(),
                    rewritten,
                    subscript_min: *m,
                    subscript_max: *big_m,
                    renaming: table,
                    child: child.input.clone(),
                },
                child: Box::new(child),
            }
        }
        NodeDoc::Case2Embed {
            u,
            v,
            alpha,
            beta,
            t,
            b,
            p,
            embedded,
            inner,
            ..
        } => {
            let u = lookup(&local, u, "case2_embed u")?;
            let v = lookup(&local, v, "case2_embed v")?;
            let fresh_t = registry.fresh(t.clone(), "stable letter of an embedding");
            let fresh_b = registry.fresh(b.clone(), "image letter of an embedding");
            let mut scope: Scope = local
                .iter()
                .filter(|(_, g)| **g != u && **g != v)
                .map(|(n, g)| (n.clone(), g.clone()))
                .collect();
            scope.insert(t.clone(), fresh_t.clone());
            scope.insert(b.clone(), fresh_b.clone());
            let image_relator = word_in(p, &scope, "case2_embed p")?;
            let embedded = parse_in(embedded, registry, &scope, "case2_embed embedded")?;
            let inner = node_from_doc(inner, registry, &embedded.name_scope())?;
            NodeKind::Case2Embed {
                data: Case2Result {
                    u,
                    v,
                    alpha: *alpha,
                    beta: *beta,
                    fresh_t,
                    fresh_b,
                    image_relator,
                    embedded,
                },
                inner: Box::new(inner),
            }
        }
        NodeDoc::FreeLeaf { rank, .. } => NodeKind::FreeLeaf { rank: *rank },
        NodeDoc::CyclicLeaf { order, .. } => NodeKind::CyclicLeaf { order: *order },
    };
    Ok(CertificateNode { input, bound, kind })
}

/// Parses a certificate document back into a tree.
pub fn read_certificate(text: &str, registry: &Registry) -> Result<CertificateNode, DocError> {
    let doc: CertificateDoc = serde_json::from_str(text)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(DocError::SchemaVersion(doc.schema_version));
    }
    node_from_doc(&doc.root, registry, &Scope::new())
}

fn describe(node: &CertificateNode) -> Vec<String> {
    match &node.kind {
        NodeKind::FreeSplit {
            free_generators, ..
        } => vec![format!(
            "free factor on {{{}}}",
            names(free_generators).join(", ")
        )],
        NodeKind::SingleElim {
            eliminated,
            resulting_rank,
        } => vec![format!(
            "{eliminated} occurs once; free group of rank {resulting_rank}"
        )],
        NodeKind::Case1Hnn { data, .. } => vec![
            format!(
                "stable letter {}, family {} with subscripts {}..{}",
                data.pivot_t, data.pivot_b, data.subscript_min, data.subscript_max
            ),
            format!("s = {}", data.rewritten),
        ],
        NodeKind::Case2Embed { data, .. } => vec![
            format!(
                "{} -> {} {}^{}, {} -> {}^{}  (alpha = {}, beta = {})",
                data.u,
                data.fresh_b,
                data.fresh_t,
                -data.beta,
                data.v,
                data.fresh_t,
                data.alpha,
                data.alpha,
                data.beta
            ),
            format!("p = {}", data.image_relator),
        ],
        NodeKind::FreeLeaf { rank } => vec![format!("free group of rank {rank}")],
        NodeKind::CyclicLeaf { order } => vec![format!("cyclic group of order {order}")],
    }
}

/// Human-readable rendering of a certificate tree, one node per block.
pub fn render_tree(root: &CertificateNode) -> String {
    let mut out = String::new();
    for (depth, node) in root.path().enumerate() {
        let pad = "  ".repeat(depth);
        let branch = if depth == 0 { "" } else { "└─ " };
        let _ = writeln!(
            out,
            "{pad}{branch}{}  {}  [bound {}]",
            node.kind.tag(),
            node.input,
            node.bound
        );
        let detail_pad = if depth == 0 {
            "    ".to_string()
        } else {
            format!("{pad}      ")
        };
        for line in describe(node) {
            let _ = writeln!(out, "{detail_pad}{line}");
        }
    }
    out
}

/// One row of batch output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BatchRow {
    pub input: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relator_length: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paper_bound: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tower_bound: Option<u32>,
    pub verified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Decomposes one presentation with its own registry. Never panics on bad input.
pub fn process_line(text: &str, all_pivots: bool) -> BatchRow {
    let registry = Registry::new();
    match parse_presentation(text, &registry) {
        Ok(p) => {
            let root = if all_pivots {
                build_best_tower(&p, &registry)
            } else {
                build_tower(&p, &registry)
            };
            let report = BoundReport::of(&root);
            let verification = verify_certificate(&root);
            BatchRow {
                input: text.to_string(),
                relator_length: Some(report.relator_len),
                paper_bound: Some(report.paper_bound),
                tower_bound: Some(report.tower_bound),
                verified: verification.is_ok(),
                error: verification.violations.first().map(ToString::to_string),
            }
        }
        Err(e) => BatchRow {
            input: text.to_string(),
            relator_length: None,
            paper_bound: None,
            tower_bound: None,
            verified: false,
            error: Some(e.to_string()),
        },
    }
}

/// Processes lines in parallel; results come back in input order. Blank
/// lines and `#` comments are skipped.
pub fn run_batch<S: AsRef<str> + Sync>(lines: &[S], all_pivots: bool) -> Vec<BatchRow> {
    let work: Vec<&str> = lines
        .iter()
        .map(|l| l.as_ref().trim())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    work.par_iter().map(|l| process_line(l, all_pivots)).collect()
}

fn cell<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_else(|| "-".into())
}

pub fn render_batch_table(rows: &[BatchRow]) -> String {
    let width = rows.iter().map(|r| r.input.len()).max().unwrap_or(0).max(5);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>4}  {:>5}  {:>5}  verified",
        "input", "|r|", "paper", "tower"
    );
    for r in rows {
        let status = match (&r.error, r.verified) {
            (_, true) => "ok".to_string(),
            (Some(e), false) => format!("FAIL: {e}"),
            (None, false) => "FAIL".to_string(),
        };
        let _ = writeln!(
            out,
            "{:<width$}  {:>4}  {:>5}  {:>5}  {}",
            r.input,
            cell(&r.relator_length),
            cell(&r.paper_bound),
            cell(&r.tower_bound),
            status
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn built(text: &str) -> CertificateNode {
        let reg = Registry::new();
        build_tower(&parse_presentation(text, &reg).unwrap(), &reg)
    }

    #[test]
    fn free_leaf_document() {
        let root = built("< a, b | 1 >");
        let doc = certificate_doc(&root);
        assert_eq!(
            doc.root,
            NodeDoc::FreeLeaf {
                input: "< a, b | 1 >".into(),
                bound: 1,
                rank: 2
            }
        );
        let json = emit_certificate(&root);
        assert!(json.contains("\"kind\": \"free_leaf\""));
        assert!(json.contains("\"schema_version\": 1"));
    }

    #[test]
    fn torus_document() {
        let doc = certificate_doc(&built("< a, b | [a,b] >"));
        let NodeDoc::Case1Hnn { m, big_m, s, .. } = &doc.root else {
            panic!("root is {:?}", doc.root)
        };
        assert_eq!((*m, *big_m), (0, 1));
        assert_eq!(s, "b@1 b@0^-1");
        let json = serde_json::to_value(&doc).unwrap();
        assert_eq!(json["root"]["kind"], "case1_hnn");
        assert_eq!(json["root"]["M"], 1);
    }

    #[test]
    fn round_trip_is_byte_identical() {
        for text in [
            "< a, b | [a,b] >",
            "< u, v | u^2 v^3 >",
            "< u, v | u v u v >",
            "< a, b, c | a^3 >",
            "< a, b, c, d | [a,b][c,d] >",
            "< a, b | a b^2 >",
        ] {
            let root = built(text);
            let json = emit_certificate(&root);
            let back = read_certificate(&json, &Registry::new()).unwrap();
            assert!(verify_certificate(&back).is_ok(), "{text}");
            assert_eq!(emit_certificate(&back), json, "{text}");
        }
    }

    #[test]
    fn bad_documents() {
        assert!(matches!(
            read_certificate("{", &Registry::new()),
            Err(DocError::Json(_))
        ));
        let mut doc = certificate_doc(&built("< a | a^2 >"));
        doc.schema_version = 2;
        let json = serde_json::to_string(&doc).unwrap();
        assert!(matches!(
            read_certificate(&json, &Registry::new()),
            Err(DocError::SchemaVersion(2))
        ));
        let json = emit_certificate(&built("< a, b | a b^2 >")).replace("\"eliminated\": \"a\"", "\"eliminated\": \"z\"");
        assert!(matches!(
            read_certificate(&json, &Registry::new()),
            Err(DocError::UnknownName { .. })
        ));
    }

    #[test]
    fn batch_keeps_order_and_survives_errors() {
        let lines = ["< a, b | [a,b] >", "", "# comment", "< a | b >", "< u, v | u^2 v^3 >"];
        let rows = run_batch(&lines, false);
        assert_eq!(rows.len(), 3);
        assert!(rows[0].verified);
        assert!(!rows[1].verified && rows[1].error.is_some());
        assert_eq!(rows[2].tower_bound, Some(2));
        let table = render_batch_table(&rows);
        assert!(table.lines().count() == 4);
    }

    #[test]
    fn rendering_mentions_every_node() {
        let text = render_tree(&built("< u, v | u^2 v^3 >"));
        assert!(text.contains("case2_embed"));
        assert!(text.contains("case1_hnn"));
        assert!(text.contains("single_elim"));
        assert!(text.contains("p = b#1 t#1^-3 b#1 t#1^3"));
    }
}
