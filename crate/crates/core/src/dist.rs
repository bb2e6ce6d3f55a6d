//! Finite-alphabet joint distributions and channels.
//!
//! A [`JointDistribution`] is always validated: entries are non-negative,
//! the grid sums to one and every symbol carries positive marginal mass.
//! Symbols are opaque labels; numeric embeddings (`x_values`, `y_values`)
//! are optional and only needed by quantities that use the values of the
//! variables (linear correlation, MMSE).

use serde::{Deserialize, Serialize};

use crate::error::{Axis, Error, Result};

/// Entries below this magnitude are structural zeros.
pub const STRUCTURAL_ZERO: f64 = 1e-15;
/// Largest deviation of the total mass from one that is silently renormalized.
pub const SUM_REJECT_TOL: f64 = 1e-9;

/// Serialized form of a joint distribution, before validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawJoint {
    pub x_alphabet: Vec<String>,
    pub y_alphabet: Vec<String>,
    pub pmf: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_values: Option<Vec<f64>>,
}

impl RawJoint {
    /// Raw grid with labels `0..n`.
    pub fn from_grid(pmf: Vec<Vec<f64>>) -> Self {
        let nx = pmf.len();
        let ny = pmf.first().map_or(0, Vec::len);
        RawJoint { x_alphabet: default_labels(nx), y_alphabet: default_labels(ny), pmf, x_values: None, y_values: None }
    }

    /// Removes rows and columns whose total mass is zero (after structural
    /// zero clamping), keeping labels and values aligned.
    pub fn drop_empty_symbols(mut self) -> Self {
        let is_zero = |v: f64| v.abs() < STRUCTURAL_ZERO;
        let keep_rows: Vec<bool> = self.pmf.iter().map(|r| !r.iter().all(|&v| is_zero(v))).collect();
        let ny = self.pmf.first().map_or(0, Vec::len);
        let keep_cols: Vec<bool> =
            (0..ny).map(|j| !self.pmf.iter().all(|r| r.get(j).is_none_or(|&v| is_zero(v)))).collect();
        fn filter<T>(v: Vec<T>, keep: &[bool]) -> Vec<T> {
            v.into_iter().zip(keep).filter_map(|(a, &k)| k.then_some(a)).collect()
        }
        self.pmf = filter(self.pmf, &keep_rows).into_iter().map(|r: Vec<f64>| filter(r, &keep_cols)).collect();
        self.x_alphabet = filter(self.x_alphabet, &keep_rows);
        self.y_alphabet = filter(self.y_alphabet, &keep_cols);
        self.x_values = self.x_values.map(|v| filter(v, &keep_rows));
        self.y_values = self.y_values.map(|v| filter(v, &keep_cols));
        self
    }
}

pub(crate) fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// Validated joint pmf P_XY on a finite grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawJoint", into = "RawJoint")]
pub struct JointDistribution {
    x_alphabet: Vec<String>,
    y_alphabet: Vec<String>,
    nx: usize,
    ny: usize,
    /// Row-major, `p[x * ny + y]`.
    p: Vec<f64>,
    x_values: Option<Vec<f64>>,
    y_values: Option<Vec<f64>>,
}

/// Validates a raw grid: clamps structural zeros, renormalizes tiny sum
/// deviations and rejects everything else.
pub fn validate(raw: RawJoint) -> Result<JointDistribution> {
    let RawJoint { x_alphabet, y_alphabet, pmf, x_values, y_values } = raw;
    let nx = pmf.len();
    if nx == 0 {
        return Err(Error::Shape("no rows".into()));
    }
    let ny = pmf[0].len();
    if ny == 0 {
        return Err(Error::Shape("no columns".into()));
    }
    if let Some(i) = pmf.iter().position(|r| r.len() != ny) {
        return Err(Error::Shape(format!("row {i} has {} entries, expected {ny}", pmf[i].len())));
    }
    if x_alphabet.len() != nx || y_alphabet.len() != ny {
        return Err(Error::AlphabetMismatch(format!(
            "grid is {nx}x{ny} but alphabets have {} and {} labels",
            x_alphabet.len(),
            y_alphabet.len()
        )));
    }
    check_values(&x_values, nx, Axis::X)?;
    check_values(&y_values, ny, Axis::Y)?;

    let mut p = Vec::with_capacity(nx * ny);
    for (i, row) in pmf.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
            if v.abs() < STRUCTURAL_ZERO {
                p.push(0.0);
            } else if v < 0.0 {
                return Err(Error::NegativeProbability { row: i, col: j, value: v });
            } else {
                p.push(v);
            }
        }
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > SUM_REJECT_TOL {
        return Err(Error::SumNotOne { sum });
    }
    p.iter_mut().for_each(|v| *v /= sum);

    for i in 0..nx {
        if p[i * ny..(i + 1) * ny].iter().all(|&v| v == 0.0) {
            return Err(Error::EmptyMarginal { axis: Axis::X, index: i });
        }
    }
    for j in 0..ny {
        if (0..nx).all(|i| p[i * ny + j] == 0.0) {
            return Err(Error::EmptyMarginal { axis: Axis::Y, index: j });
        }
    }
    Ok(JointDistribution { x_alphabet, y_alphabet, nx, ny, p, x_values, y_values })
}

fn check_values(values: &Option<Vec<f64>>, n: usize, axis: Axis) -> Result<()> {
    match values {
        Some(v) if v.len() != n => {
            Err(Error::AlphabetMismatch(format!("{axis} values have length {}, alphabet has {n}", v.len())))
        }
        Some(v) if v.iter().any(|x| !x.is_finite()) => {
            Err(Error::InvalidParams(format!("{axis} values must be finite")))
        }
        _ => Ok(()),
    }
}

impl TryFrom<RawJoint> for JointDistribution {
    type Error = Error;
    fn try_from(raw: RawJoint) -> Result<Self> {
        validate(raw)
    }
}

impl From<JointDistribution> for RawJoint {
    fn from(d: JointDistribution) -> Self {
        let pmf = d.p.chunks(d.ny).map(<[f64]>::to_vec).collect();
        RawJoint { x_alphabet: d.x_alphabet, y_alphabet: d.y_alphabet, pmf, x_values: d.x_values, y_values: d.y_values }
    }
}

impl JointDistribution {
    /// Validates a grid with default labels `0..n`.
    pub fn new(pmf: Vec<Vec<f64>>) -> Result<Self> {
        validate(RawJoint::from_grid(pmf))
    }

    pub fn with_labels(mut self, x: Vec<String>, y: Vec<String>) -> Result<Self> {
        if x.len() != self.nx || y.len() != self.ny {
            return Err(Error::AlphabetMismatch(format!("expected {} and {} labels", self.nx, self.ny)));
        }
        self.x_alphabet = x;
        self.y_alphabet = y;
        Ok(self)
    }

    /// Attaches numeric embeddings of the symbols.
    pub fn with_values(mut self, x: Option<Vec<f64>>, y: Option<Vec<f64>>) -> Result<Self> {
        check_values(&x, self.nx, Axis::X)?;
        check_values(&y, self.ny, Axis::Y)?;
        if x.is_some() {
            self.x_values = x;
        }
        if y.is_some() {
            self.y_values = y;
        }
        Ok(self)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    #[inline]
    pub fn p(&self, x: usize, y: usize) -> f64 {
        self.p[x * self.ny + y]
    }

    /// Row-major probabilities.
    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.p[x * self.ny..(x + 1) * self.ny]
    }

    pub fn x_alphabet(&self) -> &[String] {
        &self.x_alphabet
    }

    pub fn y_alphabet(&self) -> &[String] {
        &self.y_alphabet
    }

    pub fn x_values(&self) -> Option<&[f64]> {
        self.x_values.as_deref()
    }

    pub fn y_values(&self) -> Option<&[f64]> {
        self.y_values.as_deref()
    }

    pub fn x_marginal(&self) -> Vec<f64> {
        self.p.chunks(self.ny).map(|r| r.iter().sum()).collect()
    }

    pub fn y_marginal(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.ny];
        for r in self.p.chunks(self.ny) {
            m.iter_mut().zip(r).for_each(|(a, b)| *a += b);
        }
        m
    }

    /// `(P_X, P_Y)`.
    pub fn marginals(&self) -> (Vec<f64>, Vec<f64>) {
        (self.x_marginal(), self.y_marginal())
    }

    /// Swaps the roles of X and Y.
    pub fn transpose(&self) -> JointDistribution {
        let mut p = vec![0.0; self.p.len()];
        for x in 0..self.nx {
            for y in 0..self.ny {
                p[y * self.nx + x] = self.p(x, y);
            }
        }
        JointDistribution {
            x_alphabet: self.y_alphabet.clone(),
            y_alphabet: self.x_alphabet.clone(),
            nx: self.ny,
            ny: self.nx,
            p,
            x_values: self.y_values.clone(),
            y_values: self.x_values.clone(),
        }
    }

    /// Splits P_XY into the input pmf P and forward channel W = P_{Y|X}.
    pub fn decompose(&self) -> (Vec<f64>, Channel) {
        let px = self.x_marginal();
        let rows = self.p.chunks(self.ny).zip(&px).flat_map(|(r, &m)| r.iter().map(move |v| v / m)).collect();
        let w = Channel {
            input_alphabet: self.x_alphabet.clone(),
            output_alphabet: self.y_alphabet.clone(),
            n_out: self.ny,
            rows,
        };
        (px, w)
    }

    /// The backward channel P_{X|Y}, mapping Y symbols to X symbols.
    pub fn backward_channel(&self) -> Channel {
        self.transpose().decompose().1
    }

    /// Grid as nested rows.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.p.chunks(self.ny).map(<[f64]>::to_vec).collect()
    }
}

/// Row-stochastic map from an input alphabet to an output alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    input_alphabet: Vec<String>,
    output_alphabet: Vec<String>,
    n_out: usize,
    rows: Vec<f64>,
}

impl Channel {
    pub fn new(input_alphabet: Vec<String>, output_alphabet: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_out = output_alphabet.len();
        if rows.len() != input_alphabet.len() || rows.is_empty() || n_out == 0 {
            return Err(Error::Shape(format!("{} rows for {} inputs", rows.len(), input_alphabet.len())));
        }
        let mut flat = Vec::with_capacity(rows.len() * n_out);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n_out {
                return Err(Error::Shape(format!("row {i} has {} entries, expected {n_out}", r.len())));
            }
            let mut s = 0.0;
            for (j, &v) in r.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                if v < -STRUCTURAL_ZERO {
                    return Err(Error::NegativeProbability { row: i, col: j, value: v });
                }
                s += v.max(0.0);
            }
            if (s - 1.0).abs() > SUM_REJECT_TOL {
                return Err(Error::SumNotOne { sum: s });
            }
            flat.extend(r.iter().map(|&v| if v.abs() < STRUCTURAL_ZERO { 0.0 } else { v / s }));
        }
        Ok(Channel { input_alphabet, output_alphabet, n_out, rows: flat })
    }

    /// Channel with labels `0..n`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_out = rows.first().map_or(0, Vec::len);
        Self::new(default_labels(rows.len()), default_labels(n_out), rows)
    }

    pub fn identity(alphabet: Vec<String>) -> Self {
        let n = alphabet.len();
        let mut rows = vec![0.0; n * n];
        (0..n).for_each(|i| rows[i * n + i] = 1.0);
        Channel { input_alphabet: alphabet.clone(), output_alphabet: alphabet, n_out: n, rows }
    }

    /// Binary symmetric channel on labels `{0, 1}`.
    pub fn bsc(crossover: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&crossover) {
            return Err(Error::InvalidParams(format!("crossover {crossover} not in [0, 1]")));
        }
        Self::from_rows(vec![vec![1.0 - crossover, crossover], vec![crossover, 1.0 - crossover]])
    }

    pub fn n_inputs(&self) -> usize {
        self.input_alphabet.len()
    }

    pub fn n_outputs(&self) -> usize {
        self.n_out
    }

    pub fn input_alphabet(&self) -> &[String] {
        &self.input_alphabet
    }

    pub fn output_alphabet(&self) -> &[String] {
        &self.output_alphabet
    }

    #[inline]
    pub fn w(&self, input: usize, output: usize) -> f64 {
        self.rows[input * self.n_out + output]
    }

    pub fn row(&self, input: usize) -> &[f64] {
        &self.rows[input * self.n_out..(input + 1) * self.n_out]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows.chunks(self.n_out).map(<[f64]>::to_vec).collect()
    }

    /// Runs `self` and then `next`: `(self ; next)(z|x) = Σ_y self(y|x) next(z|y)`.
    pub fn then(&self, next: &Channel) -> Result<Channel> {
        compose(self, next)
    }
}

/// Composition of `w` followed by `v`. The output alphabet of `w` must equal
/// the input alphabet of `v`.
pub fn compose(w: &Channel, v: &Channel) -> Result<Channel> {
    if w.output_alphabet != v.input_alphabet {
        return Err(Error::AlphabetMismatch(format!(
            "cannot feed outputs {:?} into inputs {:?}",
            w.output_alphabet, v.input_alphabet
        )));
    }
    let n_out = v.n_out;
    let mut rows = vec![0.0; w.n_inputs() * n_out];
    for (x, out) in rows.chunks_mut(n_out).enumerate() {
        for (y, &wxy) in w.row(x).iter().enumerate() {
            if wxy == 0.0 {
                continue;
            }
            out.iter_mut().zip(v.row(y)).for_each(|(o, &vz)| *o += wxy * vz);
        }
    }
    Ok(Channel { input_alphabet: w.input_alphabet.clone(), output_alphabet: v.output_alphabet.clone(), n_out, rows })
}

/// Output pmf `W∘P`.
pub fn push_forward(p: &[f64], w: &Channel) -> Result<Vec<f64>> {
    if p.len() != w.n_inputs() {
        return Err(Error::AlphabetMismatch(format!(
            "pmf has {} entries, channel has {} inputs",
            p.len(),
            w.n_inputs()
        )));
    }
    let mut out = vec![0.0; w.n_out];
    for (x, &px) in p.iter().enumerate() {
        out.iter_mut().zip(w.row(x)).for_each(|(o, &v)| *o += px * v);
    }
    Ok(out)
}

/// Joint distribution `P×W`, labelled by the channel's alphabets.
pub fn join(p: &[f64], w: &Channel) -> Result<JointDistribution> {
    if p.len() != w.n_inputs() {
        return Err(Error::AlphabetMismatch(format!(
            "pmf has {} entries, channel has {} inputs",
            p.len(),
            w.n_inputs()
        )));
    }
    let pmf = p.iter().enumerate().map(|(x, &px)| w.row(x).iter().map(|v| px * v).collect()).collect();
    validate(RawJoint {
        x_alphabet: w.input_alphabet.clone(),
        y_alphabet: w.output_alphabet.clone(),
        pmf,
        x_values: None,
        y_values: None,
    })
}
