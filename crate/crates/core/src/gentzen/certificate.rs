//! Line-oriented proof certificates.
//!
//! `ID. <sequent> ; <rule> ; from <ids|-> ; subst <name=term, ...|->`, children before
//! parents, structurally equal nodes written once, root on the last line.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use super::{parse_sequent, ProofNode, Rule};
use crate::error::{Error, Result};
use crate::formulas::{parse_formula, Signature};

pub fn write_certificate(root: &Arc<ProofNode>) -> String {
    struct Writer {
        by_ptr: HashMap<*const ProofNode, usize>,
        by_body: HashMap<String, usize>,
        out: String,
    }
    impl Writer {
        fn visit(&mut self, node: &Arc<ProofNode>) -> usize {
            if let Some(&id) = self.by_ptr.get(&Arc::as_ptr(node)) {
                return id;
            }
            let kids: Vec<usize> = node.children.iter().map(|c| self.visit(c)).collect();
            let from = if kids.is_empty() {
                "-".to_string()
            } else {
                kids.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
            };
            let subst = if node.subst.is_empty() {
                "-".to_string()
            } else {
                node.subst.iter().map(|(k, t)| format!("{k}={t}")).collect::<Vec<_>>().join(", ")
            };
            let body = format!("{} ; {} ; from {} ; subst {}", node.sequent, node.rule, from, subst);
            let id = match self.by_body.get(&body) {
                Some(&id) => id,
                None => {
                    let id = self.by_body.len() + 1;
                    let _ = writeln!(self.out, "{id}. {body}");
                    self.by_body.insert(body, id);
                    id
                }
            };
            self.by_ptr.insert(Arc::as_ptr(node), id);
            id
        }
    }
    let mut w = Writer { by_ptr: HashMap::new(), by_body: HashMap::new(), out: String::new() };
    w.visit(root);
    w.out
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::File { line, msg: msg.into() }
}

/// Splits on `, ` outside parentheses.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let bytes = s.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

/// Rebuilds the proof; the result still has to pass [`super::check_proof`].
pub fn parse_certificate(text: &str, sig: &Signature) -> Result<Arc<ProofNode>> {
    let mut nodes: Vec<Arc<ProofNode>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let (id, body) = raw.split_once(". ").ok_or_else(|| err(line, "expected `ID. ...`"))?;
        let id: usize = id.trim().parse().map_err(|_| err(line, format!("bad node id `{id}`")))?;
        if id != nodes.len() + 1 {
            return Err(err(line, format!("node ids must run 1, 2, ...; found {id}")));
        }
        let parts: Vec<&str> = body.split(" ; ").collect();
        let [seq, rule, from, subst] = parts[..] else {
            return Err(err(line, "expected four fields separated by ` ; `"));
        };
        let sequent = parse_sequent(seq, sig).map_err(|e| err(line, e.to_string()))?;
        let rule = Rule::from_name(rule.trim()).ok_or_else(|| err(line, format!("unknown rule `{rule}`")))?;
        let from = from.strip_prefix("from ").ok_or_else(|| err(line, "expected `from`"))?.trim();
        let children = if from == "-" {
            Vec::new()
        } else {
            from.split(',')
                .map(|c| {
                    let c: usize = c.trim().parse().map_err(|_| err(line, format!("bad child id `{c}`")))?;
                    if c == 0 || c > nodes.len() {
                        return Err(err(line, format!("child {c} is not an earlier node")));
                    }
                    Ok(nodes[c - 1].clone())
                })
                .collect::<Result<_>>()?
        };
        let subst = subst.strip_prefix("subst ").ok_or_else(|| err(line, "expected `subst`"))?.trim();
        let subst = if subst == "-" {
            Vec::new()
        } else {
            split_top_level(subst)
                .into_iter()
                .map(|entry| {
                    let (k, t) = entry.split_once('=').ok_or_else(|| err(line, format!("bad entry `{entry}`")))?;
                    let t = parse_formula(t.trim(), sig).map_err(|e| err(line, e.to_string()))?;
                    Ok((k.trim().to_string(), t))
                })
                .collect::<Result<_>>()?
        };
        nodes.push(ProofNode::new(sequent, rule, children, subst));
    }
    nodes.pop().ok_or_else(|| err(0, "empty certificate"))
}
