//! Line-oriented instance text format.
//!
//! ```text
//! # comment
//! vars 2
//! dom 0 0 1
//! dom 1 0 1
//! con 0 1 allow 0:0 1:1
//! ```
//!
//! Pair lists are `all`, `none`, `allow a:b ...` or `forbid a:b ...`, where
//! `a` is a value of the first variable and `b` of the second. Parsing is
//! strict: unknown directives, missing `dom` lines and trailing tokens are
//! errors.

use std::fmt::Write as _;

use thiserror::Error;

use crate::consistency::ValuePair;
use crate::domain::DomainState;
use crate::network::{ConstraintDef, ConstraintNetwork, NetworkError, PairSpec, Relation};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing `vars` header")]
    MissingHeader,
    #[error("expected {expected} `dom` lines, found {found}")]
    MissingDomains { expected: usize, found: usize },
    #[error(transparent)]
    Network(#[from] NetworkError),
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        message: message.into(),
    }
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T, FormatError> {
    tok.parse()
        .map_err(|_| syntax(line, format!("invalid number `{tok}`")))
}

pub fn parse_instance(text: &str) -> Result<ConstraintNetwork, FormatError> {
    let mut var_count: Option<usize> = None;
    let mut domains: Vec<Vec<i64>> = Vec::new();
    let mut defs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        let directive = toks.next().unwrap_or_default();
        match directive {
            "vars" => {
                if var_count.is_some() {
                    return Err(syntax(line, "duplicate `vars` header"));
                }
                let n = toks
                    .next()
                    .ok_or_else(|| syntax(line, "`vars` needs a count"))?;
                var_count = Some(parse_num(n, line)?);
                if toks.next().is_some() {
                    return Err(syntax(line, "trailing tokens after `vars`"));
                }
            }
            "dom" => {
                let n = var_count.ok_or(FormatError::MissingHeader)?;
                if !defs.is_empty() {
                    return Err(syntax(line, "`dom` after `con`"));
                }
                let var: usize = parse_num(
                    toks.next().ok_or_else(|| syntax(line, "`dom` needs a variable"))?,
                    line,
                )?;
                if var != domains.len() || var >= n {
                    return Err(syntax(
                        line,
                        format!("expected `dom {}`, found `dom {var}`", domains.len()),
                    ));
                }
                let values = toks
                    .map(|t| parse_num::<i64>(t, line))
                    .collect::<Result<Vec<_>, _>>()?;
                if values.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(syntax(line, "domain values must be strictly increasing"));
                }
                domains.push(values);
            }
            "con" => {
                let n = var_count.ok_or(FormatError::MissingHeader)?;
                if domains.len() != n {
                    return Err(FormatError::MissingDomains {
                        expected: n,
                        found: domains.len(),
                    });
                }
                let i: usize = parse_num(
                    toks.next().ok_or_else(|| syntax(line, "`con` needs two variables"))?,
                    line,
                )?;
                let j: usize = parse_num(
                    toks.next().ok_or_else(|| syntax(line, "`con` needs two variables"))?,
                    line,
                )?;
                let kind = toks
                    .next()
                    .ok_or_else(|| syntax(line, "`con` needs a pair list"))?;
                let mut pairs = Vec::new();
                let rest: Vec<&str> = toks.collect();
                if matches!(kind, "allow" | "forbid") {
                    for tok in &rest {
                        let (a, b) = tok
                            .split_once(':')
                            .ok_or_else(|| syntax(line, format!("bad pair `{tok}`")))?;
                        pairs.push((parse_num(a, line)?, parse_num(b, line)?));
                    }
                } else if !rest.is_empty() {
                    return Err(syntax(line, format!("trailing tokens after `{kind}`")));
                }
                let pairs = match kind {
                    "all" => PairSpec::All,
                    "none" => PairSpec::None,
                    "allow" => PairSpec::Allow(pairs),
                    "forbid" => PairSpec::Forbid(pairs),
                    other => return Err(syntax(line, format!("unknown pair list `{other}`"))),
                };
                defs.push(ConstraintDef {
                    vars: (i, j),
                    pairs,
                });
            }
            other => return Err(syntax(line, format!("unknown directive `{other}`"))),
        }
    }
    let n = var_count.ok_or(FormatError::MissingHeader)?;
    if domains.len() != n {
        return Err(FormatError::MissingDomains {
            expected: n,
            found: domains.len(),
        });
    }
    Ok(ConstraintNetwork::build(domains, &defs)?)
}

fn write_relation(out: &mut String, net: &ConstraintNetwork, x: usize, y: usize, rel: &Relation) {
    let total = rel.rows() * rel.cols();
    let allowed = rel.allowed_count();
    let _ = write!(out, "con {x} {y}");
    if allowed == total {
        out.push_str(" all");
    } else if allowed == 0 {
        out.push_str(" none");
    } else {
        let allow = allowed * 2 <= total;
        out.push_str(if allow { " allow" } else { " forbid" });
        for a in 0..rel.rows() {
            for b in 0..rel.cols() {
                if rel.get(a, b) == allow {
                    let _ = write!(out, " {}:{}", net.values(x)[a], net.values(y)[b]);
                }
            }
        }
    }
    out.push('\n');
}

/// Serializes `net` in canonical form.
pub fn write_instance(net: &ConstraintNetwork) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "vars {}", net.var_count());
    for var in 0..net.var_count() {
        out.push_str("dom ");
        out.push_str(&var.to_string());
        for v in net.values(var) {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    for c in net.constraints() {
        let (x, y) = c.scope();
        write_relation(&mut out, net, x, y, c.relation());
    }
    out
}

/// The sub-network induced by `state`: domains shrink to their surviving
/// values and every relation is restricted accordingly. `None` if some
/// domain is empty.
pub fn restrict_network(net: &ConstraintNetwork, state: &DomainState) -> Option<ConstraintNetwork> {
    if state.is_wiped_out() {
        return None;
    }
    let kept: Vec<Vec<usize>> = (0..net.var_count())
        .map(|v| state.domain(v).iter().collect())
        .collect();
    let domains = kept
        .iter()
        .enumerate()
        .map(|(v, ks)| ks.iter().map(|&k| net.values(v)[k]).collect())
        .collect();
    let relations = net
        .constraints()
        .iter()
        .map(|c| {
            let (x, y) = c.scope();
            let mut rel = Relation::empty(kept[x].len(), kept[y].len());
            for (na, &a) in kept[x].iter().enumerate() {
                for (nb, &b) in kept[y].iter().enumerate() {
                    rel.set(na, nb, c.relation().get(a, b));
                }
            }
            (x, y, rel)
        })
        .collect();
    ConstraintNetwork::from_relations(domains, relations).ok()
}

/// The network left after a filter run: domains restricted to `state` and
/// the given pairs forbidden, adding constraints where needed. `None` on
/// wipeout.
pub fn filtered_network(
    net: &ConstraintNetwork,
    state: &DomainState,
    deleted_pairs: &[ValuePair],
) -> Option<ConstraintNetwork> {
    if deleted_pairs.is_empty() {
        return restrict_network(net, state);
    }
    let n = net.var_count();
    let mut relations: Vec<(usize, usize, Relation)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut r = Relation::empty(net.domain_size(i), net.domain_size(j));
            for a in 0..net.domain_size(i) {
                for b in 0..net.domain_size(j) {
                    r.set(a, b, net.relation_value(i, a, j, b).unwrap_or(true));
                }
            }
            let mut touched = false;
            for &((x, a), (y, b)) in deleted_pairs {
                if (x, y) == (i, j) {
                    r.set(a, b, false);
                    touched = true;
                } else if (y, x) == (i, j) {
                    r.set(b, a, false);
                    touched = true;
                }
            }
            if net.are_linked(i, j) || touched {
                relations.push((i, j, r));
            }
        }
    }
    let domains = (0..n).map(|v| net.values(v).to_vec()).collect();
    let widened = ConstraintNetwork::from_relations(domains, relations).ok()?;
    restrict_network(&widened, state)
}
