//! Naive reference implementations of the homogeneous and discrete
//! right-hand sides. They share no code with the solvers: every sum is
//! written out as nested loops over plain vectors, straight from the
//! gain/loss bookkeeping.
#![allow(dead_code, clippy::needless_range_loop)]

/// A continuous model sampled on a quadrature grid. Closures take node
/// indices; `transition` and `macro_transition` return raw rows `[i][j]`
/// that the oracle normalizes itself.
pub struct Continuum<'a> {
    pub n: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `η_hk(u_a, u_b)` including any field weight.
    pub eta: &'a dyn Fn(usize, usize, usize, usize) -> f64,
    pub transition: &'a dyn Fn(usize, usize, usize, usize) -> Vec<Vec<f64>>,
    /// `μ_hk(u_a, E)`.
    pub macro_rate: &'a dyn Fn(usize, usize, usize, f64) -> f64,
    pub macro_transition: &'a dyn Fn(usize, usize, usize, f64) -> Vec<Vec<f64>>,
    /// `P_ik(u_a, u_b)` as a row over output nodes.
    pub proliferation: &'a dyn Fn(usize, usize, usize, usize) -> Vec<f64>,
    /// `D_ik(u_j, u_b)`.
    pub destruction: &'a dyn Fn(usize, usize, usize, usize) -> f64,
    /// `φ_i(u_j)`; `None` for no drift.
    pub drift: Option<&'a dyn Fn(usize, usize) -> f64>,
}

fn mass(weights: &[f64], rows: &[Vec<f64>]) -> f64 {
    let mut s = 0.0;
    for row in rows {
        for j in 0..row.len() {
            s += weights[j] * row[j];
        }
    }
    s
}

/// `df_i(u_j)/dt` for a continuous model, summing every term directly.
pub fn homogeneous_rhs(c: &Continuum, f: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, m) = (c.n, c.nodes.len());
    let w = &c.weights;
    let mut gain = vec![vec![0.0; m]; n];
    let mut loss = vec![vec![0.0; m]; n];

    // micro-micro
    for h in 0..n {
        for k in 0..n {
            for a in 0..m {
                for b in 0..m {
                    let rows = (c.transition)(h, k, a, b);
                    let norm = mass(w, &rows);
                    let enc = (c.eta)(h, k, a, b) * w[a] * f[h][a] * w[b] * f[k][b];
                    for i in 0..n {
                        for j in 0..m {
                            gain[i][j] += enc * rows[i][j] / norm;
                        }
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..m {
            for k in 0..n {
                for b in 0..m {
                    loss[i][j] += (c.eta)(i, k, j, b) * f[i][j] * w[b] * f[k][b];
                }
            }
        }
    }

    // micro-macro against the activations
    let mut act = vec![0.0; n];
    for k in 0..n {
        let (mut num, mut den) = (0.0, 0.0);
        for j in 0..m {
            num += w[j] * c.nodes[j] * f[k][j];
            den += w[j] * f[k][j];
        }
        act[k] = num / den;
    }
    for h in 0..n {
        for k in 0..n {
            for a in 0..m {
                let rate = (c.macro_rate)(h, k, a, act[k]);
                if rate == 0.0 {
                    continue;
                }
                let rows = (c.macro_transition)(h, k, a, act[k]);
                let norm = mass(w, &rows);
                for i in 0..n {
                    for j in 0..m {
                        gain[i][j] += rate * act[k] * w[a] * f[h][a] * rows[i][j] / norm;
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..m {
            for k in 0..n {
                loss[i][j] += (c.macro_rate)(i, k, j, act[k]) * act[k] * f[i][j];
            }
        }
    }

    // births and deaths
    for i in 0..n {
        for k in 0..n {
            for a in 0..m {
                for b in 0..m {
                    let p = (c.proliferation)(i, k, a, b);
                    let enc = (c.eta)(i, k, a, b) * w[a] * f[i][a] * w[b] * f[k][b];
                    for j in 0..m {
                        gain[i][j] += enc * p[j];
                    }
                }
            }
            for j in 0..m {
                for b in 0..m {
                    loss[i][j] += (c.eta)(i, k, j, b)
                        * (c.destruction)(i, k, j, b)
                        * f[i][j]
                        * w[b]
                        * f[k][b];
                }
            }
        }
    }

    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for j in 0..m {
            out[i][j] = gain[i][j] - loss[i][j];
        }
    }

    // upwind drift with closed ends
    if let Some(phi) = c.drift {
        for i in 0..n {
            let mut flux = vec![0.0; m + 1];
            for j in 1..m {
                let speed = 0.5 * (phi(i, j - 1) + phi(i, j));
                flux[j] = if speed > 0.0 {
                    speed * f[i][j - 1]
                } else {
                    speed * f[i][j]
                };
            }
            for j in 0..m {
                out[i][j] -= (flux[j + 1] - flux[j]) / w[j];
            }
        }
    }
    out
}

/// Flat tables of a discrete model, indexed as `eta[((p m + q) n + h) m + k]`,
/// `transition[(((p m + q) n + h) m + k) n m + i m + j]`,
/// `macro_rate[(p m + q) n + k]` and
/// `macro_transition[((p m + q) n + k) n m + i m + j]`.
pub struct Tables<'a> {
    pub n: usize,
    pub m: usize,
    pub nodes: &'a [f64],
    pub eta: &'a [f64],
    pub transition: &'a [f64],
    pub macro_rate: &'a [f64],
    pub macro_transition: &'a [f64],
    pub proliferation: &'a [f64],
    pub destruction: &'a [f64],
}

/// `df_ij/dt` for a discrete model, six nested loops deep.
pub fn discrete_rhs(t: &Tables, f: &[Vec<f64>], scale: f64) -> Vec<Vec<f64>> {
    let (n, m) = (t.n, t.m);
    let mut gain = vec![vec![0.0; m]; n];
    let mut loss = vec![vec![0.0; m]; n];
    for p in 0..n {
        for q in 0..m {
            for h in 0..n {
                for k in 0..m {
                    let pqhk = ((p * m + q) * n + h) * m + k;
                    let enc = scale * t.eta[pqhk] * f[p][q] * f[h][k];
                    for i in 0..n {
                        for j in 0..m {
                            gain[i][j] += enc * t.transition[pqhk * n * m + i * m + j];
                        }
                    }
                    loss[p][q] += enc;
                    gain[p][q] += enc * t.proliferation[pqhk];
                    loss[p][q] += enc * t.destruction[pqhk];
                }
            }
        }
    }
    let mut act = vec![0.0; n];
    for k in 0..n {
        let (mut num, mut den) = (0.0, 0.0);
        for j in 0..m {
            num += t.nodes[j] * f[k][j];
            den += f[k][j];
        }
        act[k] = num / den;
    }
    if !t.macro_rate.is_empty() {
        for p in 0..n {
            for q in 0..m {
                for k in 0..n {
                    let pqk = (p * m + q) * n + k;
                    let enc = scale * t.macro_rate[pqk] * f[p][q] * act[k];
                    for i in 0..n {
                        for j in 0..m {
                            gain[i][j] += enc * t.macro_transition[pqk * n * m + i * m + j];
                        }
                    }
                    loss[p][q] += enc;
                }
            }
        }
    }
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for j in 0..m {
            out[i][j] = gain[i][j] - loss[i][j];
        }
    }
    out
}

/// Largest absolute entrywise difference.
pub fn max_gap(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let mut g: f64 = 0.0;
    for (x, y) in a.iter().zip(b) {
        assert_eq!(x.len(), y.len());
        for (u, v) in x.iter().zip(y) {
            g = g.max((u - v).abs());
        }
    }
    g
}

pub mod instances;
