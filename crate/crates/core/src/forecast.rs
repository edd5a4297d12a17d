//! Forecasting strategies and the rolling-origin evaluation protocol.
//!
//! Every method is evaluated the same way: predict `h` steps from the current
//! training prefix, score them against the truth, append the true values and
//! repeat until the test segment is exhausted.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{h_mase, MaseScore};
use crate::neighbors::{KdTree, Metric};
use crate::points::PointCloud;
use crate::series::{mean, min_length, reconstruct_values, split_point};

pub const DEFAULT_AR_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    RandomWalk,
    Naive,
    /// Nearest-neighbor analogue forecasting in an (m, tau) reconstruction.
    Lma { m: usize, tau: usize, theiler: usize },
    /// Least-squares autoregression with intercept, refitted every
    /// `refit_every` forecast origins.
    Ar { order: usize, refit_every: usize },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::RandomWalk => "random_walk",
            Method::Naive => "naive",
            Method::Lma { .. } => "lma",
            Method::Ar { .. } => "ar",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Method::Lma { m, tau, .. } if m == 0 || tau == 0 => {
                Err(Error::invalid(format!("lma needs m >= 1 and tau >= 1, got m = {m}, tau = {tau}")))
            }
            Method::Ar { order: 0, .. } => Err(Error::invalid("ar order must be at least 1")),
            Method::Ar { refit_every: 0, .. } => Err(Error::invalid("ar refit interval must be at least 1")),
            _ => Ok(()),
        }
    }
}

pub fn forecast_random_walk(train: &[f64]) -> Result<f64> {
    train.last().copied().ok_or(Error::EmptySeries)
}

pub fn forecast_naive(train: &[f64]) -> Result<f64> {
    if train.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok(mean(train))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmaForecast {
    pub predictions: Vec<f64>,
    /// Series index (anchor) of the neighbor chosen at each step.
    pub neighbors: Vec<usize>,
}

/// `steps` iterated analogue forecasts from the end of `train`.
pub fn forecast_lma(train: &[f64], m: usize, tau: usize, steps: usize, theiler: usize) -> Result<Vec<f64>> {
    forecast_lma_detailed(train, m, tau, steps, theiler).map(|f| f.predictions)
}

pub fn forecast_lma_detailed(
    train: &[f64],
    m: usize,
    tau: usize,
    steps: usize,
    theiler: usize,
) -> Result<LmaForecast> {
    let index = LmaIndex::new(train, m, tau)?;
    index.predict(train.len(), steps, theiler)
}

/// Reconstruction of a whole series with a k-d tree over it. Forecasts from
/// a prefix only admit neighbors whose forward image lies in that prefix.
struct LmaIndex<'a> {
    values: &'a [f64],
    m: usize,
    tau: usize,
    cloud: PointCloud,
}

impl<'a> LmaIndex<'a> {
    fn new(values: &'a [f64], m: usize, tau: usize) -> Result<Self> {
        if m == 0 || tau == 0 {
            return Err(Error::invalid("m and tau must be at least 1"));
        }
        let cloud = reconstruct_values(values, m, tau)?.into_points();
        Ok(LmaIndex { values, m, tau, cloud })
    }

    fn offset(&self) -> usize {
        (self.m - 1) * self.tau
    }

    fn predict(&self, known: usize, steps: usize, theiler: usize) -> Result<LmaForecast> {
        self.predict_with(&KdTree::new(&self.cloud), known, steps, theiler)
    }

    fn predict_with(&self, tree: &KdTree, known: usize, steps: usize, theiler: usize) -> Result<LmaForecast> {
        let required = min_length(self.m, self.tau);
        if known < required {
            return Err(Error::SeriesTooShort { required, actual: known });
        }
        let offset = self.offset();
        let mut history = self.values[..known].to_vec();
        let mut neighbors = Vec::with_capacity(steps);
        let mut query = vec![0.0; self.m];
        for _ in 0..steps {
            let q = history.len() - 1;
            for (c, slot) in query.iter_mut().enumerate() {
                *slot = history[q - c * self.tau];
            }
            let admit = |i: usize| {
                let anchor = i + offset;
                anchor + 1 < known && anchor.abs_diff(q) > theiler
            };
            let nb = tree
                .nearest(&query, Metric::Euclidean, admit)
                .ok_or(Error::NoAdmissibleNeighbor)?;
            let anchor = nb.index + offset;
            neighbors.push(anchor);
            history.push(self.values[anchor + 1]);
        }
        Ok(LmaForecast { predictions: history.split_off(known), neighbors })
    }
}

/// Fitted autoregression `x_t = c + sum_i a_i x_{t-i}`. When the design is
/// rank deficient the model predicts the training mean and `fallback` is set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub fallback: bool,
}

impl ArModel {
    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn predict_next(&self, history: &[f64]) -> f64 {
        let n = history.len();
        self.intercept
            + self
                .coefficients
                .iter()
                .enumerate()
                .map(|(i, a)| a * history[n - 1 - i])
                .sum::<f64>()
    }

    /// Iterated forecast, feeding predictions back as inputs.
    pub fn predict(&self, history: &[f64], steps: usize) -> Vec<f64> {
        let p = self.order();
        let mut tail = history[history.len() - p..].to_vec();
        let mut out = Vec::with_capacity(steps);
        for _ in 0..steps {
            let next = self.predict_next(&tail);
            out.push(next);
            tail.push(next);
        }
        out
    }
}

/// Normal equations of the AR regression, grown one row at a time.
#[derive(Debug, Clone)]
struct ArAccumulator {
    order: usize,
    gram: DMatrix<f64>,
    rhs: DVector<f64>,
    rows: usize,
    sum: f64,
    seen: usize,
}

impl ArAccumulator {
    fn new(order: usize) -> Self {
        ArAccumulator {
            order,
            gram: DMatrix::zeros(order + 1, order + 1),
            rhs: DVector::zeros(order + 1),
            rows: 0,
            sum: 0.0,
            seen: 0,
        }
    }

    /// Absorbs `values[self.seen..]`, which must extend what was seen before.
    fn extend(&mut self, values: &[f64]) {
        let p = self.order;
        let mut row = DVector::zeros(p + 1);
        for t in self.seen..values.len() {
            self.sum += values[t];
            if t < p {
                continue;
            }
            row[0] = 1.0;
            for i in 0..p {
                row[i + 1] = values[t - 1 - i];
            }
            self.gram.ger(1.0, &row, &row, 1.0);
            self.rhs.axpy(values[t], &row, 1.0);
            self.rows += 1;
        }
        self.seen = values.len();
    }

    fn solve(&self) -> ArModel {
        let fallback = || ArModel {
            intercept: self.sum / self.seen as f64,
            coefficients: vec![0.0; self.order],
            fallback: true,
        };
        if self.rows <= self.order {
            return fallback();
        }
        let svd = self.gram.clone().svd(true, true);
        let largest = svd.singular_values.max();
        if !(largest > 0.0) || svd.rank(largest * 1e-12) < self.order + 1 {
            return fallback();
        }
        match svd.solve(&self.rhs, 0.0) {
            Ok(beta) if beta.iter().all(|b| b.is_finite()) => ArModel {
                intercept: beta[0],
                coefficients: beta.iter().skip(1).copied().collect(),
                fallback: false,
            },
            _ => fallback(),
        }
    }
}

pub fn fit_ar(train: &[f64], order: usize) -> Result<ArModel> {
    if order == 0 {
        return Err(Error::invalid("ar order must be at least 1"));
    }
    if train.len() <= order {
        return Err(Error::SeriesTooShort { required: order + 1, actual: train.len() });
    }
    let mut acc = ArAccumulator::new(order);
    acc.extend(train);
    Ok(acc.solve())
}

pub fn forecast_ar(train: &[f64], order: usize) -> Result<f64> {
    let model = fit_ar(train, order)?;
    Ok(model.predict_next(train))
}

#[derive(Debug, Clone, Serialize)]
pub struct ForecastRun {
    pub method: Method,
    pub h: usize,
    pub train_length: usize,
    pub predictions: Vec<f64>,
    pub truth: Vec<f64>,
    pub score: MaseScore,
    pub metadata: Vec<(String, String)>,
}

/// Rolling-origin evaluation of `method` on the split of `values` at `fraction`.
pub fn rolling_evaluate(values: &[f64], fraction: f64, method: &Method, h: usize) -> Result<ForecastRun> {
    method.validate()?;
    let n_train = checked_split(values, fraction, h)?;
    let mut metadata = Vec::new();
    let (predictions, truth) = match *method {
        Method::RandomWalk => {
            rolling(values, n_train, h, |hist, steps| Ok(vec![forecast_random_walk(hist)?; steps]))?
        }
        Method::Naive => rolling(values, n_train, h, |hist, steps| Ok(vec![forecast_naive(hist)?; steps]))?,
        Method::Lma { m, tau, theiler } => {
            let index = LmaIndex::new(values, m, tau)?;
            let tree = KdTree::new(&index.cloud);
            metadata.push(("theiler".into(), theiler.to_string()));
            rolling(values, n_train, h, |hist, steps| {
                Ok(index.predict_with(&tree, hist.len(), steps, theiler)?.predictions)
            })?
        }
        Method::Ar { order, refit_every } => {
            if n_train <= order {
                return Err(Error::SeriesTooShort { required: order + 1, actual: n_train });
            }
            let mut acc = ArAccumulator::new(order);
            let mut model: Option<ArModel> = None;
            let mut origins = 0usize;
            let mut fallbacks = 0usize;
            let out = rolling(values, n_train, h, |hist, steps| {
                acc.extend(hist);
                if origins % refit_every == 0 || model.is_none() {
                    let fitted = acc.solve();
                    if fitted.fallback {
                        fallbacks += 1;
                    }
                    model = Some(fitted);
                }
                origins += 1;
                Ok(model.as_ref().map(|mdl| mdl.predict(hist, steps)).unwrap_or_default())
            })?;
            metadata.push(("ar_order".into(), order.to_string()));
            metadata.push(("ar_refit_every".into(), refit_every.to_string()));
            metadata.push(("ar_fallback_fits".into(), fallbacks.to_string()));
            out
        }
    };
    finish(*method, h, values, n_train, predictions, truth, metadata)
}

/// Rolling-origin evaluation with a caller-supplied predictor, which receives
/// the current training prefix and the number of steps to forecast.
pub fn rolling_evaluate_with<F>(values: &[f64], fraction: f64, h: usize, method: Method, predictor: F) -> Result<ForecastRun>
where
    F: FnMut(&[f64], usize) -> Result<Vec<f64>>,
{
    let n_train = checked_split(values, fraction, h)?;
    let (predictions, truth) = rolling(values, n_train, h, predictor)?;
    finish(method, h, values, n_train, predictions, truth, Vec::new())
}

fn checked_split(values: &[f64], fraction: f64, h: usize) -> Result<usize> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid(format!("split fraction must lie in (0, 1), got {fraction}")));
    }
    if h == 0 {
        return Err(Error::invalid("h must be at least 1"));
    }
    let n = values.len();
    let n_train = split_point(n, fraction);
    if n_train == 0 || n_train == n {
        return Err(Error::invalid(format!("split of {n} samples at {fraction} leaves an empty part")));
    }
    if n_train <= h {
        return Err(Error::SeriesTooShort { required: h + 1, actual: n_train });
    }
    Ok(n_train)
}

fn rolling<F>(values: &[f64], n_train: usize, h: usize, mut predictor: F) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: FnMut(&[f64], usize) -> Result<Vec<f64>>,
{
    let n = values.len();
    let mut predictions = Vec::with_capacity(n - n_train);
    let mut known = n_train;
    while known < n {
        let steps = h.min(n - known);
        let block = predictor(&values[..known], steps).map_err(|e| Error::AtPosition {
            position: known - n_train,
            source: Box::new(e),
        })?;
        if block.len() != steps {
            return Err(Error::LengthMismatch { left: block.len(), right: steps });
        }
        predictions.extend(block);
        known += steps;
    }
    Ok((predictions, values[n_train..].to_vec()))
}

fn finish(
    method: Method,
    h: usize,
    values: &[f64],
    n_train: usize,
    predictions: Vec<f64>,
    truth: Vec<f64>,
    metadata: Vec<(String, String)>,
) -> Result<ForecastRun> {
    let score = h_mase(&predictions, &truth, &values[..n_train], h)?;
    Ok(ForecastRun { method, h, train_length: n_train, predictions, truth, score, metadata })
}
