//! Lagrange and repetition data encoding.
//!
//! The dataset `X_1..X_k` is encoded into `n*r` shards. In Lagrange mode the
//! shards are evaluations of the degree-`(k-1)` interpolating polynomial `u`
//! with `u(beta_j) = X_j`; applying a degree-`D` function to every shard then
//! yields evaluations of `f(u(z))`, which has degree `(k-1)*D` and is therefore
//! recoverable from any `K* = (k-1)*D + 1` of them. When there are too few
//! shards for that, chunks are replicated instead.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{fp_inv, lagrange_interpolate, Fp, PrimeField};

/// Minimum number of shard results needed to decode.
///
/// `(k-1)*deg_f + 1` when `n*r >= k*deg_f - 1`, otherwise `n*r - floor(n*r/k) + 1`.
pub fn recovery_threshold(n: usize, r: usize, k: usize, deg_f: usize) -> usize {
    let nr = n * r;
    if lagrange_applies(nr, k, deg_f) {
        (k - 1) * deg_f + 1
    } else {
        nr - nr / k + 1
    }
}

fn lagrange_applies(nr: usize, k: usize, deg_f: usize) -> bool {
    nr + 1 >= k * deg_f
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodingMode {
    Lagrange,
    Repetition,
}

/// The raw data: `k` equal-length chunks of field elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    field: PrimeField,
    chunks: Vec<Vec<Fp>>,
    chunk_len: usize,
}

impl Dataset {
    pub fn new(field: PrimeField, chunks: Vec<Vec<Fp>>) -> Result<Self> {
        let chunk_len = chunks.first().map_or(0, Vec::len);
        if chunk_len == 0 {
            return Err(Error::InvalidDataset(
                "need at least one non-empty chunk".into(),
            ));
        }
        for (j, chunk) in chunks.iter().enumerate() {
            if chunk.len() != chunk_len {
                return Err(Error::InvalidDataset(format!(
                    "chunk {} has length {}, expected {chunk_len}",
                    j + 1,
                    chunk.len()
                )));
            }
            if let Some(x) = chunk.iter().find(|x| x.modulus() != field.modulus()) {
                return Err(Error::ModulusMismatch(field.modulus(), x.modulus()));
            }
        }
        Ok(Self {
            field,
            chunks,
            chunk_len,
        })
    }

    pub fn random<R: Rng + ?Sized>(
        field: PrimeField,
        k: usize,
        chunk_len: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let chunks = (0..k)
            .map(|_| (0..chunk_len).map(|_| field.random(rng)).collect())
            .collect();
        Self::new(field, chunks)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn k(&self) -> usize {
        self.chunks.len()
    }

    pub fn chunk_len(&self) -> usize {
        self.chunk_len
    }

    pub fn chunks(&self) -> &[Vec<Fp>] {
        &self.chunks
    }

    /// Decimal text: one chunk per line, elements separated by whitespace.
    /// Lines starting with `#` and blank lines are ignored.
    pub fn from_text(field: PrimeField, text: &str) -> Result<Self> {
        let mut chunks = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|tok| {
                    let v: u64 = tok.parse().map_err(|_| {
                        Error::InvalidDataset(format!("line {}: bad element {tok:?}", lineno + 1))
                    })?;
                    if v >= field.modulus() {
                        return Err(Error::InvalidDataset(format!(
                            "line {}: element {v} is not below the modulus {}",
                            lineno + 1,
                            field.modulus()
                        )));
                    }
                    Ok(field.elem(v))
                })
                .collect::<Result<Vec<_>>>()?;
            chunks.push(row);
        }
        Self::new(field, chunks)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for chunk in &self.chunks {
            write_row(&mut out, chunk);
        }
        out
    }
}

pub(crate) fn write_row(out: &mut String, row: &[Fp]) {
    for (i, x) in row.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{x}");
    }
    out.push('\n');
}

/// Encoding parameters for `n` workers storing `r` shards each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodingScheme {
    field: PrimeField,
    n: usize,
    r: usize,
    k: usize,
    deg_f: usize,
    mode: CodingMode,
    beta: Vec<Fp>,
    alpha: Vec<Fp>,
    recovery_threshold: usize,
}

impl CodingScheme {
    /// Uses `beta_j = j - 1` and `alpha_v = v - 1`, so the first `min(k, n*r)`
    /// shards are the raw chunks.
    pub fn new(field: PrimeField, n: usize, r: usize, k: usize, deg_f: usize) -> Result<Self> {
        if n == 0 || r == 0 || k == 0 || deg_f == 0 {
            return Err(Error::InvalidScheme(format!(
                "n, r, k, deg_f must all be >= 1 (got {n}, {r}, {k}, {deg_f})"
            )));
        }
        let nr = n * r;
        let needed = k.max(nr);
        if field.modulus() <= needed as u64 {
            return Err(Error::FieldTooSmall {
                modulus: field.modulus(),
                needed,
            });
        }
        let mode = if lagrange_applies(nr, k, deg_f) {
            CodingMode::Lagrange
        } else {
            CodingMode::Repetition
        };
        let recovery_threshold = recovery_threshold(n, r, k, deg_f);
        if recovery_threshold > nr {
            return Err(Error::InvalidScheme(format!(
                "recovery threshold {recovery_threshold} exceeds the {nr} available shards"
            )));
        }
        Ok(Self {
            field,
            n,
            r,
            k,
            deg_f,
            mode,
            beta: (0..k as u64).map(|j| field.elem(j)).collect(),
            alpha: (0..nr as u64).map(|v| field.elem(v)).collect(),
            recovery_threshold,
        })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn deg_f(&self) -> usize {
        self.deg_f
    }

    pub fn mode(&self) -> CodingMode {
        self.mode
    }

    pub fn beta(&self) -> &[Fp] {
        &self.beta
    }

    pub fn alpha(&self) -> &[Fp] {
        &self.alpha
    }

    pub fn recovery_threshold(&self) -> usize {
        self.recovery_threshold
    }

    pub fn shard_count(&self) -> usize {
        self.n * self.r
    }

    /// Worker (1-based) that stores shard `v` (1-based).
    pub fn owner(&self, v: usize) -> usize {
        (v - 1) / self.r + 1
    }

    /// Shard indices (1-based) a worker evaluates under `load`: the first
    /// `load` of the `r` shards it stores.
    pub fn shards_for(&self, worker: usize, load: usize) -> std::ops::RangeInclusive<usize> {
        let first = (worker - 1) * self.r + 1;
        first..=first + load.min(self.r) - 1
    }

    /// Original chunk (1-based) held by shard `v` in repetition mode.
    pub fn repetition_source(&self, v: usize) -> usize {
        (v - 1) % self.k + 1
    }

    /// `prod_{l != j} (z - beta_l) / (beta_j - beta_l)` for every `j`.
    fn lagrange_basis_at(&self, z: Fp) -> Result<Vec<Fp>> {
        let mut weights = Vec::with_capacity(self.k);
        for (j, &bj) in self.beta.iter().enumerate() {
            let mut num = self.field.one();
            let mut den = self.field.one();
            for (l, &bl) in self.beta.iter().enumerate() {
                if l != j {
                    num *= z - bl;
                    den *= bj - bl;
                }
            }
            weights.push(num * fp_inv(den)?);
        }
        Ok(weights)
    }
}

/// One encoded shard `X~_v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedShard {
    /// 1-based shard index `v`.
    pub index: usize,
    /// 1-based worker index `ceil(v / r)`.
    pub owner: usize,
    pub payload: Vec<Fp>,
}

pub fn encode(data: &Dataset, scheme: &CodingScheme) -> Result<Vec<EncodedShard>> {
    if data.k() != scheme.k {
        return Err(Error::DimensionMismatch {
            expected: scheme.k,
            got: data.k(),
        });
    }
    if data.field() != scheme.field {
        return Err(Error::ModulusMismatch(
            scheme.field.modulus(),
            data.field().modulus(),
        ));
    }
    let field = scheme.field;
    (1..=scheme.shard_count())
        .map(|v| {
            let payload = match scheme.mode {
                CodingMode::Lagrange => {
                    let weights = scheme.lagrange_basis_at(scheme.alpha[v - 1])?;
                    let mut acc = vec![field.zero(); data.chunk_len()];
                    for (w, chunk) in weights.iter().zip(data.chunks()) {
                        for (a, &x) in acc.iter_mut().zip(chunk) {
                            *a += *w * x;
                        }
                    }
                    acc
                }
                CodingMode::Repetition => data.chunks()[scheme.repetition_source(v) - 1].clone(),
            };
            Ok(EncodedShard {
                index: v,
                owner: scheme.owner(v),
                payload,
            })
        })
        .collect()
}

/// The per-round computation applied to every assigned shard.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WorkFunction {
    /// `x . w`, a scalar result.
    LinearMap { weights: Vec<Fp> },
    /// `sum_t c_t x^t` applied to every component; `coeffs` is low degree first.
    ElementwisePolynomial { coeffs: Vec<Fp> },
}

impl WorkFunction {
    pub fn linear(weights: Vec<Fp>) -> Self {
        Self::LinearMap { weights }
    }

    /// Trailing zero coefficients are dropped; the result must have degree >= 1.
    pub fn elementwise(mut coeffs: Vec<Fp>) -> Result<Self> {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.len() < 2 {
            return Err(Error::InvalidScheme(
                "elementwise polynomial must have degree >= 1".into(),
            ));
        }
        Ok(Self::ElementwisePolynomial { coeffs })
    }

    /// A random function of the given degree over `dim`-component inputs:
    /// a linear map for degree 1, an elementwise polynomial otherwise.
    pub fn random<R: Rng + ?Sized>(
        field: PrimeField,
        degree: usize,
        dim: usize,
        rng: &mut R,
    ) -> Result<Self> {
        match degree {
            0 => Err(Error::InvalidScheme("function degree must be >= 1".into())),
            1 => Ok(Self::linear((0..dim).map(|_| field.random(rng)).collect())),
            _ => {
                let mut coeffs: Vec<Fp> = (0..degree).map(|_| field.random(rng)).collect();
                coeffs.push(field.elem(rng.gen_range(1..field.modulus())));
                Self::elementwise(coeffs)
            }
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            Self::LinearMap { .. } => 1,
            Self::ElementwisePolynomial { coeffs } => coeffs.len() - 1,
        }
    }

    /// Evaluates on a raw vector. Linear maps return a single element.
    pub fn evaluate(&self, x: &[Fp]) -> Result<Vec<Fp>> {
        match self {
            Self::LinearMap { weights } => {
                if weights.len() != x.len() {
                    return Err(Error::DimensionMismatch {
                        expected: weights.len(),
                        got: x.len(),
                    });
                }
                let Some(first) = x.first() else {
                    return Ok(Vec::new());
                };
                let dot = x
                    .iter()
                    .zip(weights)
                    .fold(first.field().zero(), |acc, (&a, &w)| acc + a * w);
                Ok(vec![dot])
            }
            Self::ElementwisePolynomial { coeffs } => Ok(x
                .iter()
                .map(|&xi| {
                    coeffs
                        .iter()
                        .rev()
                        .fold(xi.field().zero(), |acc, &c| acc * xi + c)
                })
                .collect()),
        }
    }
}

impl std::fmt::Display for WorkFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (label, values) = match self {
            Self::LinearMap { weights } => ("linear map, weights", weights),
            Self::ElementwisePolynomial { coeffs } => {
                ("elementwise polynomial, coefficients", coeffs)
            }
        };
        write!(f, "{label}")?;
        for v in values {
            write!(f, " {v}")?;
        }
        Ok(())
    }
}

/// Local computation on one shard.
pub fn apply_function(f: &WorkFunction, shard: &EncodedShard) -> Result<Vec<Fp>> {
    f.evaluate(&shard.payload)
}

/// Recovers `f(X_1)..f(X_k)` from `(shard index, f(shard))` pairs.
///
/// Lagrange mode interpolates `f(u(z))` componentwise through the first `K*`
/// results and evaluates it at every `beta_j`; repetition mode picks one
/// received copy of every chunk.
pub fn decode(
    results: &[(usize, Vec<Fp>)],
    scheme: &CodingScheme,
    f: &WorkFunction,
) -> Result<Vec<Vec<Fp>>> {
    if f.degree() > scheme.deg_f {
        return Err(Error::DegreeTooHigh {
            got: f.degree(),
            scheme: scheme.deg_f,
        });
    }
    let needed = scheme.recovery_threshold;
    let mut seen = HashSet::with_capacity(results.len());
    for (v, _) in results {
        if *v == 0 || *v > scheme.shard_count() || !seen.insert(*v) {
            return Err(Error::BadShardIndex(*v));
        }
    }
    if results.len() < needed {
        return Err(Error::NotDecodable {
            got: results.len(),
            needed,
        });
    }
    let dim = results[0].1.len();
    if let Some((_, bad)) = results.iter().find(|(_, value)| value.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: bad.len(),
        });
    }

    match scheme.mode {
        CodingMode::Lagrange => {
            let used = &results[..needed];
            let mut decoded = vec![Vec::with_capacity(dim); scheme.k];
            for c in 0..dim {
                let points: Vec<_> = used
                    .iter()
                    .map(|(v, value)| (scheme.alpha[v - 1], value[c]))
                    .collect();
                let poly = lagrange_interpolate(&points)?;
                for (out, &b) in decoded.iter_mut().zip(&scheme.beta) {
                    out.push(poly.eval(b));
                }
            }
            Ok(decoded)
        }
        CodingMode::Repetition => {
            let mut decoded: Vec<Option<Vec<Fp>>> = vec![None; scheme.k];
            for (v, value) in results {
                let slot = &mut decoded[scheme.repetition_source(*v) - 1];
                if slot.is_none() {
                    *slot = Some(value.clone());
                }
            }
            Ok(decoded
                .into_iter()
                .map(|copy| copy.expect("K* results always cover every chunk"))
                .collect())
        }
    }
}
