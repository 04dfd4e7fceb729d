use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use hopwise::graph::Family;
use hopwise::harness::generate_scenario;
use hopwise::Graph;

/// Textual network description accepted by `--graph`.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSpec {
    Family(Family),
    Geometric { n: usize, avg_degree: usize },
    File(PathBuf),
}

fn numbers(list: &str) -> Result<Vec<usize>> {
    list.split(',')
        .map(|s| s.trim().parse::<usize>().with_context(|| format!("bad number {s:?}")))
        .collect()
}

impl GraphSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let Some((kind, rest)) = text.split_once(':') else {
            bail!("graph spec {text:?} must look like family:..., geometric:... or file:...")
        };
        match kind {
            "file" => Ok(GraphSpec::File(PathBuf::from(rest))),
            "geometric" => match numbers(rest)?[..] {
                [n, avg_degree] => Ok(GraphSpec::Geometric { n, avg_degree }),
                _ => bail!("geometric spec needs N,AVG_DEGREE"),
            },
            "family" => {
                let (name, params) = rest.split_once(',').unwrap_or((rest, ""));
                let p = if params.is_empty() { Vec::new() } else { numbers(params)? };
                let fam = match (name, &p[..]) {
                    ("path", [n]) => Family::Path { n: *n },
                    ("cycle", [n]) => Family::Cycle { n: *n },
                    ("complete", [n]) => Family::Complete { n: *n },
                    ("regular", [n, k]) => Family::Circulant { n: *n, k: *k },
                    ("petersen", []) => Family::Petersen,
                    _ => bail!(
                        "unknown family spec {rest:?}; expected path,N | cycle,N | complete,N | regular,N,K | petersen"
                    ),
                };
                Ok(GraphSpec::Family(fam))
            }
            other => bail!("unknown graph kind {other:?}"),
        }
    }

    /// Builds the graph; a geometric graph is the one of scenario 0 for
    /// `seed`, so `bounds` and `simulate` agree on it.
    pub fn build(&self, seed: u64) -> Result<Graph> {
        Ok(match self {
            GraphSpec::Family(f) => Graph::family(*f)?,
            GraphSpec::Geometric { n, avg_degree } => generate_scenario(seed, 0, *n, *avg_degree)?.graph,
            GraphSpec::File(path) => {
                Graph::read_edge_list(path).with_context(|| format!("cannot load {}", path.display()))?
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_kind() {
        assert_eq!(GraphSpec::parse("family:path,3").unwrap(), GraphSpec::Family(Family::Path { n: 3 }));
        assert_eq!(
            GraphSpec::parse("family:regular,10,4").unwrap(),
            GraphSpec::Family(Family::Circulant { n: 10, k: 4 })
        );
        assert_eq!(GraphSpec::parse("family:petersen").unwrap(), GraphSpec::Family(Family::Petersen));
        assert_eq!(
            GraphSpec::parse("geometric:100,20").unwrap(),
            GraphSpec::Geometric { n: 100, avg_degree: 20 }
        );
        assert_eq!(GraphSpec::parse("file:a.txt").unwrap(), GraphSpec::File("a.txt".into()));
    }

    #[test]
    fn rejects_malformed_specs() {
        for bad in ["path,3", "family:path", "family:torus,3", "geometric:10", "mesh:3", "family:cycle,x"] {
            assert!(GraphSpec::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn geometric_build_is_seeded() {
        let spec = GraphSpec::parse("geometric:30,4").unwrap();
        assert_eq!(spec.build(1).unwrap(), spec.build(1).unwrap());
        assert_ne!(spec.build(1).unwrap(), spec.build(2).unwrap());
        assert_eq!(spec.build(1).unwrap().num_links(), 60);
    }
}
