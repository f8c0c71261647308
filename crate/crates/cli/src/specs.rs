//! Mini-grammars for `--generate`, `--graphs`, `--faults` and `--seeds`.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use twoconn_core::graph::{figure1, generate_clustered, generate_random_connected};
use twoconn_core::simulator::{
    FaultField, FaultSpec, FaultTarget, FaultValue, FieldFault, Trigger,
};
use twoconn_core::{Graph, GraphError, NodeId, PathValue};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error(
        "unknown graph spec `{0}` (expected random:n,m,seed | clustered:KxS[,seed] | figure1)"
    )]
    UnknownGraph(String),
    #[error("bad number `{0}`")]
    BadNumber(String),
    #[error("random graph needs m >= n - 1 (got n = {n}, m = {m})")]
    TooFewEdges { n: usize, m: usize },
    #[error("bad fault spec `{0}`")]
    BadFault(String),
    #[error("bad seed range `{0}` (expected A, A..B or A..=B)")]
    BadRange(String),
    #[error("seed range `{0}` is empty")]
    EmptyRange(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn num<T: FromStr>(s: &str) -> Result<T, SpecError> {
    s.trim()
        .parse()
        .map_err(|_| SpecError::BadNumber(s.trim().to_string()))
}

/// A generated graph family. Missing seeds are filled in by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphSpec {
    Random {
        n: usize,
        m: usize,
        seed: Option<u64>,
    },
    Clustered {
        k: usize,
        size: usize,
        seed: Option<u64>,
    },
    Figure1,
}

impl GraphSpec {
    pub fn build(&self, default_seed: u64) -> Result<Graph, SpecError> {
        match *self {
            GraphSpec::Random { n, m, seed } => {
                if m + 1 < n {
                    return Err(SpecError::TooFewEdges { n, m });
                }
                let extra = m + 1 - n.max(1);
                Ok(generate_random_connected(
                    n,
                    extra,
                    seed.unwrap_or(default_seed),
                )?)
            }
            GraphSpec::Clustered { k, size, seed } => {
                Ok(generate_clustered(k, size, seed.unwrap_or(default_seed))?)
            }
            GraphSpec::Figure1 => Ok(figure1()),
        }
    }

    /// The same spec with its seed fixed.
    pub fn with_seed(&self, seed: u64) -> GraphSpec {
        match *self {
            GraphSpec::Random { n, m, seed: s } => GraphSpec::Random {
                n,
                m,
                seed: s.or(Some(seed)),
            },
            GraphSpec::Clustered { k, size, seed: s } => GraphSpec::Clustered {
                k,
                size,
                seed: s.or(Some(seed)),
            },
            GraphSpec::Figure1 => GraphSpec::Figure1,
        }
    }
}

impl FromStr for GraphSpec {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<GraphSpec, SpecError> {
        let s = s.trim();
        let unknown = || SpecError::UnknownGraph(s.to_string());
        if s == "figure1" {
            return Ok(GraphSpec::Figure1);
        }
        let (kind, args) = s.split_once(':').ok_or_else(unknown)?;
        let parts: Vec<&str> = args.split(',').collect();
        match (kind, &parts[..]) {
            ("random", [n, m]) => Ok(GraphSpec::Random {
                n: num(n)?,
                m: num(m)?,
                seed: None,
            }),
            ("random", [n, m, seed]) => Ok(GraphSpec::Random {
                n: num(n)?,
                m: num(m)?,
                seed: Some(num(seed)?),
            }),
            ("clustered", [shape, rest @ ..]) if rest.len() <= 1 => {
                let (k, size) = shape.split_once(['x', 'X']).ok_or_else(unknown)?;
                let seed = rest.first().map(|s| num(s)).transpose()?;
                Ok(GraphSpec::Clustered {
                    k: num(k)?,
                    size: num(size)?,
                    seed,
                })
            }
            _ => Err(unknown()),
        }
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Random { n, m, seed } => {
                write!(f, "random:{n},{m}")?;
                seed.map_or(Ok(()), |s| write!(f, ",{s}"))
            }
            GraphSpec::Clustered { k, size, seed } => {
                write!(f, "clustered:{k}x{size}")?;
                seed.map_or(Ok(()), |s| write!(f, ",{s}"))
            }
            GraphSpec::Figure1 => f.write_str("figure1"),
        }
    }
}

/// Semicolon-separated graph specs.
pub fn parse_graph_list(s: &str) -> Result<Vec<GraphSpec>, SpecError> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(str::parse)
        .collect()
}

/// Parses `TRIGGER:TARGET` items separated by `;`.
///
/// * `TRIGGER` is `post` or a step index.
/// * `TARGET` is `random:K`, `all` (every register field), `state`
///   (registers, locals and program counters), or a comma list of
///   `NODE.FIELD[=VALUE]` with `FIELD` one of `path`, `count`, `bcc`,
///   `locals`.
///
/// Item `i` draws its random choices from `seed + i`.
pub fn parse_faults(s: &str, seed: u64) -> Result<Vec<FaultSpec>, SpecError> {
    s.split(';')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .enumerate()
        .map(|(i, item)| {
            let bad = || SpecError::BadFault(item.to_string());
            let (trigger, target) = item.split_once(':').ok_or_else(bad)?;
            let trigger = match trigger.trim() {
                "post" => Trigger::AfterStabilization,
                t => Trigger::AtStep(t.parse().map_err(|_| bad())?),
            };
            let target = match target.trim() {
                "all" => FaultTarget::AllRegisters,
                "state" => FaultTarget::AllState,
                t => match t.strip_prefix("random:") {
                    Some(k) => FaultTarget::RandomFields { k: num(k)? },
                    None => FaultTarget::Fields(
                        t.split(',')
                            .map(|f| parse_field(f).ok_or_else(bad))
                            .collect::<Result<_, _>>()?,
                    ),
                },
            };
            Ok(FaultSpec {
                trigger,
                target,
                seed: seed.wrapping_add(i as u64),
            })
        })
        .collect()
}

fn parse_field(s: &str) -> Option<FieldFault> {
    let (lhs, value) = match s.split_once('=') {
        Some((l, v)) => (l, Some(v.trim())),
        None => (s, None),
    };
    let (node, field) = lhs.trim().split_once('.')?;
    let node = NodeId(node.parse().ok()?);
    let field = match field {
        "path" => FaultField::Path,
        "count" => FaultField::Count,
        "bcc" => FaultField::Bcc,
        "locals" => FaultField::Locals,
        _ => return None,
    };
    let value = match (field, value) {
        (_, None) => None,
        (FaultField::Count, Some(v)) => Some(FaultValue::Count(v.parse().ok()?)),
        (FaultField::Path | FaultField::Bcc, Some(v)) => {
            Some(FaultValue::Path(PathValue::parse(v)?))
        }
        (FaultField::Locals, Some(_)) => return None,
    };
    Some(FieldFault { node, field, value })
}

/// `A`, `A..B` (exclusive) or `A..=B`. Empty ranges are errors.
pub fn parse_seed_range(s: &str) -> Result<RangeInclusive<u64>, SpecError> {
    let s = s.trim();
    let bad = || SpecError::BadRange(s.to_string());
    let range = if let Some((a, b)) = s.split_once("..=") {
        let (a, b): (u64, u64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
        a..=b
    } else if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u64, u64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
        if b == 0 {
            return Err(SpecError::EmptyRange(s.to_string()));
        }
        a..=b - 1
    } else {
        let a: u64 = s.parse().map_err(|_| bad())?;
        a..=a
    };
    if range.is_empty() {
        return Err(SpecError::EmptyRange(s.to_string()));
    }
    Ok(range)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_specs() {
        assert_eq!(
            "random:6,8,3".parse::<GraphSpec>().unwrap(),
            GraphSpec::Random {
                n: 6,
                m: 8,
                seed: Some(3)
            }
        );
        assert_eq!(
            "clustered:1x3".parse::<GraphSpec>().unwrap(),
            GraphSpec::Clustered {
                k: 1,
                size: 3,
                seed: None
            }
        );
        assert_eq!("figure1".parse::<GraphSpec>().unwrap(), GraphSpec::Figure1);
        assert!("ring:5".parse::<GraphSpec>().is_err());
        let g = "random:6,8,3"
            .parse::<GraphSpec>()
            .unwrap()
            .build(0)
            .unwrap();
        assert_eq!((g.n(), g.m()), (6, 8));
        assert!(matches!(
            "random:6,3".parse::<GraphSpec>().unwrap().build(0),
            Err(SpecError::TooFewEdges { .. })
        ));
        for s in ["random:6,8,3", "clustered:2x4,9", "figure1", "random:5,4"] {
            assert_eq!(s.parse::<GraphSpec>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn fault_specs() {
        let f = parse_faults(
            "post:random:3;1000:5.count=7,2.path=⊥.1;post:all;7:state",
            10,
        )
        .unwrap();
        assert_eq!(f.len(), 4);
        assert_eq!(f[0].trigger, Trigger::AfterStabilization);
        assert_eq!(f[0].target, FaultTarget::RandomFields { k: 3 });
        assert_eq!(f[1].trigger, Trigger::AtStep(1000));
        assert_eq!(
            f[1].target,
            FaultTarget::Fields(vec![
                FieldFault {
                    node: NodeId(5),
                    field: FaultField::Count,
                    value: Some(FaultValue::Count(7))
                },
                FieldFault {
                    node: NodeId(2),
                    field: FaultField::Path,
                    value: Some(FaultValue::Path(PathValue::from_ports(&[1])))
                },
            ])
        );
        assert_eq!(f[2].target, FaultTarget::AllRegisters);
        assert_eq!(f[3].target, FaultTarget::AllState);
        assert_eq!(f[3].seed, 13);
        assert!(parse_faults("soon:all", 0).is_err());
        assert!(parse_faults("post:3.colour=1", 0).is_err());
        assert!(parse_faults("", 0).unwrap().is_empty());
    }

    #[test]
    fn seed_ranges() {
        assert_eq!(parse_seed_range("4").unwrap(), 4..=4);
        assert_eq!(parse_seed_range("0..10").unwrap(), 0..=9);
        assert_eq!(parse_seed_range("3..=5").unwrap(), 3..=5);
        assert!(matches!(
            parse_seed_range("5..5"),
            Err(SpecError::EmptyRange(_))
        ));
        assert!(matches!(
            parse_seed_range("0..0"),
            Err(SpecError::EmptyRange(_))
        ));
        assert!(matches!(
            parse_seed_range("6..=2"),
            Err(SpecError::EmptyRange(_))
        ));
        assert!(matches!(
            parse_seed_range("a..b"),
            Err(SpecError::BadRange(_))
        ));
    }
}
