//! Parsers for the small text formats accepted on the command line.

use std::collections::BTreeMap;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex;
use suq2_bmo::bmo::TrigPoly;
use suq2_bmo::fdlp::{matrix_from_text, FdAlgebra};
use suq2_bmo::gnsmod::ModularUcp;
use suq2_bmo::polalg::Symbol;
use suq2_bmo::scalar::CMatrix;
use suq2_bmo::{ExactPol, NumericPol};

pub fn element(spec: &str) -> Result<ExactPol> {
    ExactPol::parse_spec(spec).with_context(|| format!("in element `{spec}`"))
}

pub fn numeric_element(spec: &str, q: f64) -> Result<NumericPol> {
    Ok(element(spec)?.evaluate_at(q)?)
}

/// Square matrix with rows separated by `;` or newlines and entries `re` or `re,im`.
pub fn matrix(spec: &str) -> Result<CMatrix<f64>> {
    let m = matrix_from_text(&spec.replace(';', "\n")).with_context(|| format!("in matrix `{spec}`"))?;
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        bail!("matrix `{spec}` must be square and nonempty, got {}×{}", m.nrows(), m.ncols());
    }
    Ok(m)
}

/// Diagonal density from positive weights, normalized to trace one. `None`
/// gives the normalized trace on `M_n`.
pub fn density(spec: Option<&str>, n: usize) -> Result<FdAlgebra<f64>> {
    let Some(spec) = spec else {
        return Ok(FdAlgebra::tracial(n));
    };
    let w: Vec<f64> = spec
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| anyhow!("bad density weight `{s}`")))
        .collect::<Result<_>>()?;
    if w.len() != n {
        bail!("density has {} weights but the algebra is M_{n}", w.len());
    }
    if w.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        bail!("density weights must be positive and finite");
    }
    let total: f64 = w.iter().sum();
    let d = CMatrix::from_fn(n, n, |i, j| if i == j { Complex::new(w[i] / total, 0.0) } else { Complex::new(0.0, 0.0) });
    Ok(FdAlgebra::new(d)?)
}

fn complex(s: &str) -> Result<Complex<f64>> {
    Complex::from_str(s.trim()).map_err(|_| anyhow!("bad complex number `{s}`"))
}

/// `heat:T`, `indicator:K1,K2,…`, `const:C` or `table:K=V,…[,default=V]`.
pub fn symbol(spec: &str) -> Result<Symbol<f64>> {
    let (kind, body) = spec.split_once(':').unwrap_or((spec, ""));
    match kind.trim() {
        "heat" => {
            let t: f64 = body.trim().parse().map_err(|_| anyhow!("heat symbol needs a time, got `{body}`"))?;
            if !(t >= 0.0 && t.is_finite()) {
                bail!("heat time must be finite and nonnegative, got {t}");
            }
            Ok(Symbol::heat(t))
        }
        "indicator" => {
            let ks: Vec<i64> = body
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.trim().parse().map_err(|_| anyhow!("bad stratum `{s}`")))
                .collect::<Result<_>>()?;
            Ok(Symbol::indicator(&ks))
        }
        "const" => Ok(Symbol::constant(complex(body)?)),
        "table" => {
            let mut values = BTreeMap::new();
            let mut default = Complex::new(0.0, 0.0);
            for item in body.split(',').filter(|s| !s.trim().is_empty()) {
                let (k, v) = item.split_once('=').ok_or_else(|| anyhow!("table entry `{item}` needs `k=v`"))?;
                if k.trim() == "default" {
                    default = complex(v)?;
                } else {
                    let k: i64 = k.trim().parse().map_err(|_| anyhow!("bad stratum `{k}`"))?;
                    values.insert(k, complex(v)?);
                }
            }
            Ok(Symbol::Table { values, default })
        }
        other => bail!("unknown symbol kind `{other}` (expected heat, indicator, const or table)"),
    }
}

/// Trigonometric polynomial written as `k:c` pairs, e.g. `1:1 -1:0.5i`.
pub fn trig(spec: &str) -> Result<TrigPoly<f64>> {
    let mut terms = Vec::new();
    for tok in spec.split_whitespace() {
        let (k, c) = tok.split_once(':').ok_or_else(|| anyhow!("torus term `{tok}` needs `k:c`"))?;
        let k: i64 = k.parse().map_err(|_| anyhow!("bad frequency `{k}`"))?;
        terms.push((k, complex(c)?));
    }
    Ok(TrigPoly::from_coeffs(terms))
}

/// `depolarizing:λ` or `schur-gaussian:t` (symbol `e^{−t(i−j)²}`).
pub fn ucp(spec: &str, alg: FdAlgebra<f64>) -> Result<ModularUcp<f64>> {
    let (kind, body) = spec.split_once(':').ok_or_else(|| anyhow!("map `{spec}` needs `kind:parameter`"))?;
    let x: f64 = body.trim().parse().map_err(|_| anyhow!("bad map parameter `{body}`"))?;
    let phi = match kind.trim() {
        "depolarizing" => ModularUcp::depolarizing(alg, x)?,
        "schur-gaussian" => {
            let n = alg.dim();
            let s = CMatrix::from_fn(n, n, |i, j| Complex::new((-x * (i as f64 - j as f64).powi(2)).exp(), 0.0));
            ModularUcp::schur(alg, s)?
        }
        other => bail!("unknown map `{other}` (expected depolarizing or schur-gaussian)"),
    };
    Ok(phi)
}
