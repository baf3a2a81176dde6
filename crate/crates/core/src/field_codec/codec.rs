//! Lagrange encoding of block parts and Berlekamp-Welch decoding of
//! coded-computation results.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{lagrange_interpolate, CodecError, Fp, Polynomial};

/// Code dimensions and the Byzantine budget they must tolerate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    pub n: usize,
    pub k: usize,
    pub f: usize,
    pub d_hash: usize,
}

impl CodeParams {
    pub fn new(n: usize, k: usize, f: usize, d_hash: usize) -> Result<Self, CodecError> {
        let params = CodeParams { n, k, f, d_hash };
        params.validate()?;
        Ok(params)
    }

    /// Checks `N >= 3f + 1 + (K-1) d_hash`, `K >= 1`, `d_hash >= 1`.
    pub fn validate(&self) -> Result<(), CodecError> {
        if self.k == 0 || self.d_hash == 0 {
            return Err(CodecError::InvalidParams(format!(
                "K and d_hash must be positive (K={}, d_hash={})",
                self.k, self.d_hash
            )));
        }
        let need = 3 * self.f + 1 + (self.k - 1) * self.d_hash;
        if self.n < need {
            return Err(CodecError::InvalidParams(format!(
                "N={} below 3f+1+(K-1)d_hash={} (K={}, f={}, d_hash={})",
                self.n, need, self.k, self.f, self.d_hash
            )));
        }
        Ok(())
    }

    /// Largest `f` admissible for the given `n`, `k`, `d_hash`.
    pub fn max_f(n: usize, k: usize, d_hash: usize) -> Option<usize> {
        let used = 1 + k.checked_sub(1)? * d_hash;
        n.checked_sub(used).map(|slack| slack / 3)
    }
}

/// Minimal number of results `R = (K-1) deg + 2f + 1` needed to decode a
/// degree-`p_degree` computation over coded shares.
pub fn decode_threshold(params: &CodeParams, p_degree: usize) -> usize {
    (params.k.saturating_sub(1)) * p_degree + 2 * params.f + 1
}

/// Evaluation points of the Lagrange code: `omega_k = k - 1` for the data
/// parts and `beta_i = K + i - 1` for the nodes (both 1-indexed).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalDomain<const P: u64> {
    data_points: Vec<Fp<P>>,
    node_points: Vec<Fp<P>>,
}

impl<const P: u64> EvalDomain<P> {
    pub fn new(n: usize, k: usize) -> Result<Self, CodecError> {
        if (n + k) as u64 >= P {
            return Err(CodecError::InvalidParams(format!(
                "field too small: need q > N + K = {}",
                n + k
            )));
        }
        let data_points = (0..k as u64).map(Fp::new).collect();
        let node_points = (0..n as u64).map(|i| Fp::new(k as u64 + i)).collect();
        Ok(EvalDomain {
            data_points,
            node_points,
        })
    }

    pub fn k(&self) -> usize {
        self.data_points.len()
    }

    pub fn n(&self) -> usize {
        self.node_points.len()
    }

    pub fn data_points(&self) -> &[Fp<P>] {
        &self.data_points
    }

    pub fn node_points(&self) -> &[Fp<P>] {
        &self.node_points
    }

    /// omega_k for 1-indexed part `k`.
    pub fn data_point(&self, k: usize) -> Fp<P> {
        self.data_points[k - 1]
    }

    /// beta_i for 1-indexed node `i`.
    pub fn node_point(&self, i: usize) -> Fp<P> {
        self.node_points[i - 1]
    }

    /// Row `i` holds the Lagrange basis values `l_k(beta_i)` for all `k`, so
    /// coded part `i` is `sum_k G[i][k] * P_k`.
    pub fn generator_matrix(&self) -> Vec<Vec<Fp<P>>> {
        let omegas = &self.data_points;
        // Barycentric weights w_k = 1 / prod_{j != k} (omega_k - omega_j).
        let weights: Vec<Fp<P>> = omegas
            .iter()
            .enumerate()
            .map(|(k, &wk)| {
                let denom = omegas
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != k)
                    .fold(Fp::ONE, |acc, (_, &wj)| acc * (wk - wj));
                denom.inv().expect("evaluation points are distinct")
            })
            .collect();
        self.node_points
            .iter()
            .map(|&beta| {
                let full = omegas.iter().fold(Fp::ONE, |acc, &w| acc * (beta - w));
                omegas
                    .iter()
                    .zip(&weights)
                    .map(|(&wk, &weight)| {
                        full * (beta - wk).inv().expect("beta is not a data point") * weight
                    })
                    .collect()
            })
            .collect()
    }
}

/// Encodes `K` equal-length parts into `N` coded parts. Coordinate `j` of coded
/// part `i` is `u_j(beta_i)`, where `u_j` interpolates `(omega_k, parts[k][j])`.
pub fn encode_parts<const P: u64, T: AsRef<[Fp<P>]>>(
    parts: &[T],
    domain: &EvalDomain<P>,
) -> Result<Vec<Vec<Fp<P>>>, CodecError> {
    if parts.len() != domain.k() {
        return Err(CodecError::ShapeMismatch(format!(
            "expected {} parts, got {}",
            domain.k(),
            parts.len()
        )));
    }
    let m = parts[0].as_ref().len();
    if let Some(bad) = parts.iter().position(|p| p.as_ref().len() != m) {
        return Err(CodecError::ShapeMismatch(format!(
            "part {} has length {}, expected {}",
            bad + 1,
            parts[bad].as_ref().len(),
            m
        )));
    }
    let g = domain.generator_matrix();
    Ok(g.iter()
        .map(|row| {
            let mut out = vec![Fp::ZERO; m];
            for (part, &coef) in parts.iter().zip(row) {
                if coef.is_zero() {
                    continue;
                }
                for (o, &v) in out.iter_mut().zip(part.as_ref()) {
                    *o += coef * v;
                }
            }
            out
        })
        .collect())
}

/// Berlekamp-Welch decoding.
///
/// Returns the unique polynomial of degree at most `degree` that agrees with at
/// least `results.len() - max_errors` of the `(x, y)` pairs.
pub fn decode_with_errors<const P: u64>(
    results: &[(Fp<P>, Fp<P>)],
    degree: usize,
    max_errors: usize,
) -> Result<Polynomial<P>, CodecError> {
    let mut seen = BTreeSet::new();
    for &(x, _) in results {
        if !seen.insert(x) {
            return Err(CodecError::DuplicatePoint(x.value()));
        }
    }
    let need = degree + 2 * max_errors + 1;
    if results.len() < need {
        return Err(CodecError::InsufficientResults {
            have: results.len(),
            need,
        });
    }

    let candidate = if max_errors == 0 {
        lagrange_interpolate(&results[..degree + 1])?
    } else {
        solve_key_equation(results, degree, max_errors)?
    };

    if candidate.degree().is_some_and(|d| d > degree) {
        return Err(CodecError::DecodeFailure);
    }
    let agreeing = results
        .iter()
        .filter(|&&(x, y)| candidate.eval(x) == y)
        .count();
    if agreeing + max_errors < results.len() {
        return Err(CodecError::DecodeFailure);
    }
    Ok(candidate)
}

/// Solves `Q(x_i) = y_i E(x_i)` with `E` monic of degree `e` and returns `Q / E`.
fn solve_key_equation<const P: u64>(
    results: &[(Fp<P>, Fp<P>)],
    degree: usize,
    e: usize,
) -> Result<Polynomial<P>, CodecError> {
    let q_len = degree + e + 1;
    let cols = q_len + e;
    let rows: Vec<Vec<Fp<P>>> = results
        .iter()
        .map(|&(x, y)| {
            let mut row = Vec::with_capacity(cols + 1);
            let mut xp = Fp::ONE;
            let mut powers = Vec::with_capacity(q_len);
            for _ in 0..q_len {
                powers.push(xp);
                xp *= x;
            }
            row.extend_from_slice(&powers);
            row.extend(powers[..e].iter().map(|&p| -(y * p)));
            row.push(y * powers[e]);
            row
        })
        .collect();

    let solution = solve_linear_system(rows, cols).ok_or(CodecError::DecodeFailure)?;
    let q = Polynomial::new(solution[..q_len].to_vec());
    let mut e_coeffs = solution[q_len..].to_vec();
    e_coeffs.push(Fp::ONE);
    let locator = Polynomial::new(e_coeffs);
    let (quot, rem) = q.div_rem(&locator)?;
    if !rem.is_zero() {
        return Err(CodecError::DecodeFailure);
    }
    Ok(quot)
}

/// Gaussian elimination on an augmented matrix (`cols` unknowns plus the
/// right-hand side). Free variables are set to zero; `None` if inconsistent.
fn solve_linear_system<const P: u64>(mut rows: Vec<Vec<Fp<P>>>, cols: usize) -> Option<Vec<Fp<P>>> {
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pivot) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, pivot);
        let inv = rows[r][c].inv().ok()?;
        for v in rows[r][c..].iter_mut() {
            *v *= inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c];
            for (v, &p) in row[c..].iter_mut().zip(&pivot_row[c..]) {
                *v -= factor * p;
            }
        }
        pivot_cols.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    if rows[r..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut x = vec![Fp::ZERO; cols];
    for (row, &c) in rows.iter().zip(&pivot_cols) {
        x[c] = row[cols];
    }
    Some(x)
}
