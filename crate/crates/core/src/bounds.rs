//! Convergence-rate constants for the ideal-controlled hopwise algorithm.
//!
//! A bound `gamma > 1` certifies `V(x) <= gamma * max_i dv_i` and hence the
//! per-iteration contraction `V(k) <= (1 - 1/gamma) V(k-1)`. The general
//! bound works on any connected graph; the closed forms specialise it (the
//! "family" slot) or exploit family structure further (the "refined" slot).

use std::fmt;

use crate::graph::{FamilyTag, Graph, GraphInvariants};
use crate::hopwise::Weights;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundSource {
    /// From `alpha`, `beta`, `n` and the diameter of a concrete graph.
    General,
    /// The general bound evaluated in closed form for a family.
    Family,
    /// Family-specific analysis; never looser than [`BoundSource::Family`]
    /// where both exist.
    Refined,
}

impl fmt::Display for BoundSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundSource::General => "general",
            BoundSource::Family => "family",
            BoundSource::Refined => "refined",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaBound {
    pub value: f64,
    pub source: BoundSource,
    pub family: Option<FamilyTag>,
}

impl GammaBound {
    /// `1 - 1/gamma`.
    pub fn contraction_factor(&self) -> f64 {
        1.0 - 1.0 / self.value
    }
}

/// `gamma = n/2 + alpha + (n^2 - beta)(3(n-1) - D)(D+1) / (2n)`.
pub fn gamma_general(inv: &GraphInvariants, w: &Weights) -> GammaBound {
    let n = inv.n as f64;
    let d = inv.diameter as f64;
    let value = n / 2.0 + w.alpha() + (n * n - w.beta()) * (3.0 * (n - 1.0) - d) * (d + 1.0) / (2.0 * n);
    GammaBound {
        value,
        source: BoundSource::General,
        family: inv.family,
    }
}

/// Interval that the general bound always falls in for `n` nodes.
pub fn gamma_general_range(n: usize) -> (f64, f64) {
    let n = n as f64;
    (n / 2.0 + 1.0, n * n * n - 2.0 * n * n + n / 2.0 + 1.0)
}

/// Closed-form bounds for one family; a slot holds the reason when its
/// formula does not apply.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedBounds {
    pub family: Result<GammaBound, String>,
    pub refined: Result<GammaBound, String>,
}

impl ClosedBounds {
    /// Smallest available bound.
    pub fn best(&self) -> Option<GammaBound> {
        match (&self.family, &self.refined) {
            (Ok(a), Ok(b)) => Some(if b.value <= a.value { *b } else { *a }),
            (Ok(a), Err(_)) => Some(*a),
            (Err(_), Ok(b)) => Some(*b),
            (Err(_), Err(_)) => None,
        }
    }
}

fn regular_family(n: f64, k: f64, d: f64) -> f64 {
    n / 2.0 + k + (n - k - 1.0) * (3.0 * (n - 1.0) - d) * (d + 1.0) / 2.0
}

fn regular_refined(n: f64, k: f64, d: f64) -> f64 {
    n / 2.0 + k + k * d * (d + 1.0) * (n - k - 1.0) / 2.0
}

/// Closed forms for `family` on `n` nodes. `diameter` is needed by the
/// regular family only.
pub fn gamma_closed(family: FamilyTag, n: usize, diameter: Option<usize>) -> ClosedBounds {
    let nf = n as f64;
    let n2 = nf * nf;
    let n3 = n2 * nf;
    // forms are evaluated over integer numerators so small cases come out exact
    let wrap = |source: BoundSource, value: f64| GammaBound {
        value,
        source,
        family: Some(family),
    };
    let fam = |v: f64| Ok(wrap(BoundSource::Family, v));
    let refd = |v: f64| Ok(wrap(BoundSource::Refined, v));
    let no = |msg: &str| Err(msg.to_string());
    match family {
        FamilyTag::Path => ClosedBounds {
            family: if n >= 5 {
                fam((4.0 * n3 - 16.0 * n2 + 18.0 * nf + 5.0) / 4.0)
            } else {
                no("path closed form requires n >= 5")
            },
            refined: if n >= 4 {
                refd((n3 - 13.0 * nf) / 6.0 + 3.0)
            } else {
                no("refined path form requires n >= 4")
            },
        },
        FamilyTag::Cycle => {
            if n < 3 {
                return ClosedBounds {
                    family: no("cycle requires n >= 3"),
                    refined: no("cycle requires n >= 3"),
                };
            }
            if n % 2 == 1 {
                ClosedBounds {
                    family: fam((5.0 * n3 - 15.0 * n2 - nf + 31.0) / 8.0),
                    refined: refd((n2 * n2 + 14.0 * n2 - 48.0 * nf + 33.0) / (24.0 * nf)),
                }
            } else {
                ClosedBounds {
                    family: fam((5.0 * n3 - 11.0 * n2 - 20.0 * nf + 52.0) / 8.0),
                    refined: refd((n2 * n2 + 20.0 * n2 - 72.0 * nf + 96.0) / (24.0 * nf)),
                }
            }
        }
        FamilyTag::Complete => ClosedBounds {
            family: fam(1.5 * nf - 1.0),
            // complete graphs are (n-1)-regular with diameter 1
            refined: if n >= 3 {
                refd(regular_refined(nf, nf - 1.0, 1.0))
            } else {
                no("regular form requires degree >= 2")
            },
        },
        FamilyTag::Regular { k } => {
            if k < 2 {
                let msg = "regular forms require degree >= 2";
                return ClosedBounds {
                    family: no(msg),
                    refined: no(msg),
                };
            }
            match diameter {
                Some(d) => ClosedBounds {
                    family: fam(regular_family(nf, k as f64, d as f64)),
                    refined: refd(regular_refined(nf, k as f64, d as f64)),
                },
                None => ClosedBounds {
                    family: no("regular forms require the diameter"),
                    refined: no("regular forms require the diameter"),
                },
            }
        }
        FamilyTag::StronglyRegular { k, mu, .. } => {
            if k < 2 || mu < 1 {
                let msg = "strongly regular forms require degree >= 2 and mu >= 1";
                return ClosedBounds {
                    family: no(msg),
                    refined: no(msg),
                };
            }
            let kf = k as f64;
            let muf = mu as f64;
            // mu >= 1 on a non-complete graph forces diameter 2
            let d = diameter.unwrap_or(2) as f64;
            ClosedBounds {
                family: fam(regular_family(nf, kf, d)),
                refined: refd(nf / 2.0 + kf + kf * (muf + 2.0) * (nf - kf - 1.0) / muf),
            }
        }
        FamilyTag::Geometric => ClosedBounds {
            family: no("no closed form for geometric graphs"),
            refined: no("no closed form for geometric graphs"),
        },
    }
}

/// Closed forms for a concrete graph, using its family tag and measured
/// diameter.
pub fn gamma_closed_for_graph(g: &Graph) -> Option<ClosedBounds> {
    let tag = g.family_tag()?;
    Some(gamma_closed(tag, g.n(), Some(g.diameter())))
}

/// Bound over two consecutive iterations: `gamma^2 / (2 gamma - 1)`, so
/// that `1 - 1/result = (1 - 1/gamma)^2`.
pub fn gamma_two_iteration(gamma: f64) -> f64 {
    gamma * gamma / (2.0 * gamma - 1.0)
}

/// Rate constant of randomized pairwise averaging on the complete graph.
pub fn gamma_pa_complete(n: usize) -> f64 {
    n as f64 - 1.0
}

/// Upper bounds on the Euclidean errors of the link values and of the
/// estimates after `k` iterations.
pub fn error_envelope(v0: f64, inv: &GraphInvariants, gamma: f64, k: u64) -> (f64, f64) {
    let max_deg = inv.max_degree as f64;
    let min_deg = inv.min_degree as f64;
    let decay = (1.0 - 1.0 / gamma).powf(k as f64 / 2.0);
    let link = (v0 * max_deg / 2.0).sqrt() * decay;
    let estimate = (2.0 * v0 * max_deg / (min_deg + max_deg)).sqrt() * decay;
    (link, estimate)
}
