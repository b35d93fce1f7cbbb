//! DCT-domain residual motion predictor with hand-derived gradients.
//!
//! A window of `P` observed frames is expressed relative to its last frame
//! and padded to `L = P + N` frames by repeating that frame (all zeros
//! after anchoring). Per coordinate channel `k` the `L x J` series `x_k` is
//! projected onto the first `C` DCT basis rows, `c_k = D x_k`, and the
//! model predicts a correction
//!
//! ```text
//! delta_k = W_c c_k W_j + b_k          (C x J)
//! y_k     = x_k + D^T delta_k + last    (L x J)
//! ```
//!
//! The last `N` rows of `y_k` are the prediction. `x_k + D^T delta_k` is
//! the inverse DCT of the full coefficient vector of `x_k` plus the
//! zero-padded correction, so with all parameters zero the model repeats
//! the last observed frame exactly.
//!
//! Training minimizes the mean squared joint distance over the predicted
//! frames. With `G_k = 2/(J N) D_f^T E_k` (`E_k` the `N x J` error, `D_f`
//! the future columns of `D`):
//!
//! ```text
//! dL/db_k = G_k
//! dL/dW_j = sum_k (W_c c_k)^T G_k
//! dL/dW_c = sum_k G_k W_j^T c_k^T
//! ```

use alloc::vec;
use alloc::vec::Vec;

use crate::dct::DctBasis;
use crate::error::{Error, Result};
use crate::motion::Motion;
use crate::rng::SplitMix64;
use crate::Vec3;

/// Losses above this abort training.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// Half-width of the uniform initialization range.
pub const INIT_SCALE: f64 = 1e-3;

/// Parameter update rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Optimizer {
    /// `p -= lr * g`.
    Sgd,
    /// Adam with bias correction.
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl Optimizer {
    pub const ADAM: Optimizer = Optimizer::Adam {
        beta1: 0.9,
        beta2: 0.999,
        epsilon: 1e-8,
    };
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub optimizer: Optimizer,
    pub learning_rate: f64,
    pub iterations: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Observed frames `P`.
    pub observed: usize,
    /// Predicted frames `N`.
    pub predicted: usize,
    /// Retained DCT coefficients `C`.
    pub coefficients: usize,
    /// Validation interval in iterations (0 disables validation).
    pub validate_every: usize,
}

impl TrainConfig {
    /// Ten observed and ten predicted frames, 15 of 20 coefficients.
    pub fn short_term() -> Self {
        Self {
            optimizer: Optimizer::ADAM,
            learning_rate: 3e-3,
            iterations: 2000,
            batch_size: 16,
            seed: 0,
            observed: 10,
            predicted: 10,
            coefficients: 15,
            validate_every: 200,
        }
    }

    /// Ten observed and 25 predicted frames, all 35 coefficients.
    pub fn long_term() -> Self {
        Self {
            predicted: 25,
            coefficients: 35,
            ..Self::short_term()
        }
    }

    pub fn window_len(&self) -> usize {
        self.observed + self.predicted
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig("learning_rate must be finite and non-negative"));
        }
        if let Optimizer::Adam { beta1, beta2, epsilon } = self.optimizer {
            let unit = |b: f64| (0.0..1.0).contains(&b);
            if !(unit(beta1) && unit(beta2) && epsilon > 0.0) {
                return Err(Error::InvalidConfig("Adam betas must lie in [0, 1) and epsilon be positive"));
            }
        }
        if self.batch_size == 0 || self.observed == 0 || self.predicted == 0 {
            return Err(Error::InvalidConfig("batch size and window lengths must be positive"));
        }
        if self.coefficients == 0 || self.coefficients > self.window_len() {
            return Err(Error::InvalidConfig("coefficients must be in 1..=observed+predicted"));
        }
        Ok(())
    }
}

/// Trainable parameters, also used to hold gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    /// `C x C`, row-major.
    pub coef_mix: Vec<f64>,
    /// `J x J`, row-major.
    pub joint_mix: Vec<f64>,
    /// `3 x C x J`: one `C x J` block per coordinate channel.
    pub bias: Vec<f64>,
}

impl Params {
    pub fn zeros(coefficients: usize, joints: usize) -> Self {
        Self {
            coef_mix: vec![0.0; coefficients * coefficients],
            joint_mix: vec![0.0; joints * joints],
            bias: vec![0.0; 3 * coefficients * joints],
        }
    }

    pub fn len(&self) -> usize {
        self.coef_mix.len() + self.joint_mix.len() + self.bias.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All entries in the order coef_mix, joint_mix, bias.
    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.coef_mix.iter().chain(&self.joint_mix).chain(&self.bias)
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.coef_mix
            .iter_mut()
            .chain(self.joint_mix.iter_mut())
            .chain(self.bias.iter_mut())
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, other: &Params, factor: f64) {
        for (a, b) in self.iter_mut().zip(other.iter()) {
            *a += factor * b;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictorModel {
    observed: usize,
    predicted: usize,
    coefficients: usize,
    joints: usize,
    pub params: Params,
    pub seed: u64,
    basis: DctBasis,
}

impl PredictorModel {
    /// All-zero model: exact last-frame repetition.
    pub fn zeros(observed: usize, predicted: usize, coefficients: usize, joints: usize) -> Result<Self> {
        Self::from_params(
            observed,
            predicted,
            coefficients,
            joints,
            Params::zeros(coefficients, joints),
            0,
        )
    }

    /// Parameters drawn from `uniform(-1e-3, 1e-3)`: coef_mix, then
    /// joint_mix, then bias, each row-major.
    pub fn init(config: &TrainConfig, joints: usize) -> Result<Self> {
        config.validate()?;
        let mut model = Self::zeros(config.observed, config.predicted, config.coefficients, joints)?;
        let mut rng = SplitMix64::new(config.seed);
        for p in model.params.iter_mut() {
            *p = rng.uniform(-INIT_SCALE, INIT_SCALE);
        }
        model.seed = config.seed;
        Ok(model)
    }

    pub fn from_params(
        observed: usize,
        predicted: usize,
        coefficients: usize,
        joints: usize,
        params: Params,
        seed: u64,
    ) -> Result<Self> {
        let len = observed + predicted;
        if observed == 0 || predicted == 0 || joints == 0 {
            return Err(Error::InvalidModel("window lengths and joint count must be positive"));
        }
        if coefficients == 0 || coefficients > len {
            return Err(Error::InvalidModel("coefficients must be in 1..=observed+predicted"));
        }
        if params.coef_mix.len() != coefficients * coefficients
            || params.joint_mix.len() != joints * joints
            || params.bias.len() != 3 * coefficients * joints
        {
            return Err(Error::InvalidModel("parameter shapes do not match dimensions"));
        }
        if !params.is_finite() {
            return Err(Error::InvalidModel("non-finite parameter"));
        }
        Ok(Self {
            observed,
            predicted,
            coefficients,
            joints,
            params,
            seed,
            basis: DctBasis::new(len),
        })
    }

    pub fn observed(&self) -> usize {
        self.observed
    }

    pub fn predicted(&self) -> usize {
        self.predicted
    }

    pub fn coefficients(&self) -> usize {
        self.coefficients
    }

    pub fn joints(&self) -> usize {
        self.joints
    }

    pub fn window_len(&self) -> usize {
        self.observed + self.predicted
    }

    /// Predicts `N` frames from `P` observed frames (frame-major).
    pub fn predict(&self, observed: &[Vec3]) -> Result<Vec<Vec3>> {
        self.check_observed(observed)?;
        let mut out = vec![[0.0; 3]; self.predicted * self.joints];
        let mut scratch = Scratch::new(self.coefficients, self.joints, self.predicted);
        for k in 0..3 {
            self.forward_channel(observed, k, &mut scratch);
            for (n, row) in scratch.future.chunks_exact(self.joints).enumerate() {
                for (j, v) in row.iter().enumerate() {
                    out[n * self.joints + j][k] = *v;
                }
            }
        }
        Ok(out)
    }

    /// [`predict`](Self::predict) on a motion holding exactly `P` frames.
    pub fn predict_motion(&self, observed: &Motion) -> Result<Motion> {
        if observed.frame_count() != self.observed {
            return Err(Error::FrameCountMismatch {
                expected: self.observed,
                found: observed.frame_count(),
            });
        }
        let pred = self.predict(observed.data())?;
        Motion::new(self.joints, pred, observed.fps(), observed.meta.clone())
    }

    fn check_observed(&self, observed: &[Vec3]) -> Result<()> {
        if observed.len() != self.observed * self.joints {
            return Err(Error::FrameCountMismatch {
                expected: self.observed,
                found: observed.len() / self.joints,
            });
        }
        Ok(())
    }

    /// Fills `scratch.coeffs`, `scratch.mixed` and `scratch.future` for
    /// channel `k`.
    fn forward_channel(&self, observed: &[Vec3], k: usize, s: &mut Scratch) {
        let (p_len, c_len, j_len) = (self.observed, self.coefficients, self.joints);
        let last = &observed[(p_len - 1) * j_len..p_len * j_len];

        // c = D x, where x is zero beyond the observed frames
        s.coeffs.iter_mut().for_each(|v| *v = 0.0);
        for t in 0..p_len - 1 {
            let frame = &observed[t * j_len..(t + 1) * j_len];
            for c in 0..c_len {
                let d = self.basis.at(c, t);
                let row = &mut s.coeffs[c * j_len..(c + 1) * j_len];
                for j in 0..j_len {
                    row[j] += d * (frame[j][k] - last[j][k]);
                }
            }
        }

        // h = W_c c
        let wc = &self.params.coef_mix;
        s.mixed.iter_mut().for_each(|v| *v = 0.0);
        for a in 0..c_len {
            let out = &mut s.mixed[a * j_len..(a + 1) * j_len];
            for b in 0..c_len {
                let w = wc[a * c_len + b];
                let src = &s.coeffs[b * j_len..(b + 1) * j_len];
                for j in 0..j_len {
                    out[j] += w * src[j];
                }
            }
        }

        // delta = h W_j + b_k
        let wj = &self.params.joint_mix;
        let bias = &self.params.bias[k * c_len * j_len..(k + 1) * c_len * j_len];
        s.delta.copy_from_slice(bias);
        for c in 0..c_len {
            let h = &s.mixed[c * j_len..(c + 1) * j_len];
            let out = &mut s.delta[c * j_len..(c + 1) * j_len];
            for i in 0..j_len {
                let hi = h[i];
                let wrow = &wj[i * j_len..(i + 1) * j_len];
                for j in 0..j_len {
                    out[j] += hi * wrow[j];
                }
            }
        }

        // future rows of x + D^T delta + last (x is zero there)
        for n in 0..self.predicted {
            let t = p_len + n;
            let out = &mut s.future[n * j_len..(n + 1) * j_len];
            for j in 0..j_len {
                out[j] = last[j][k];
            }
            for c in 0..c_len {
                let d = self.basis.at(c, t);
                let row = &s.delta[c * j_len..(c + 1) * j_len];
                for j in 0..j_len {
                    out[j] += d * row[j];
                }
            }
        }
    }

    /// Loss of one window (`P + N` frames, frame-major) and its gradient.
    pub fn loss_and_gradient(&self, window: &[Vec3]) -> Result<(f64, Params)> {
        let mut grad = Params::zeros(self.coefficients, self.joints);
        let mut scratch = Scratch::new(self.coefficients, self.joints, self.predicted);
        let loss = self.accumulate(window, 1.0, &mut grad, &mut scratch)?;
        Ok((loss, grad))
    }

    /// Loss of one window without gradients.
    pub fn window_loss(&self, window: &[Vec3]) -> Result<f64> {
        self.check_window(window)?;
        let pred = self.predict(&window[..self.observed * self.joints])?;
        let target = &window[self.observed * self.joints..];
        crate::metrics::mean_squared_distance(&pred, target)
    }

    fn check_window(&self, window: &[Vec3]) -> Result<()> {
        if window.len() != self.window_len() * self.joints {
            return Err(Error::FrameCountMismatch {
                expected: self.window_len(),
                found: window.len() / self.joints,
            });
        }
        Ok(())
    }

    /// Adds `weight * dLoss/dParams` of one window to `grad`; returns the
    /// window's loss.
    fn accumulate(&self, window: &[Vec3], weight: f64, grad: &mut Params, s: &mut Scratch) -> Result<f64> {
        self.check_window(window)?;
        let (p_len, c_len, j_len, n_len) = (self.observed, self.coefficients, self.joints, self.predicted);
        let observed = &window[..p_len * j_len];
        let target = &window[p_len * j_len..];
        let norm = 1.0 / (j_len * n_len) as f64;
        let mut loss = 0.0;
        for k in 0..3 {
            self.forward_channel(observed, k, s);

            // G = 2/(J N) D_f^T E, accumulated straight into the bias slot
            s.grad_delta.iter_mut().for_each(|v| *v = 0.0);
            for n in 0..n_len {
                let t = p_len + n;
                let pred = &s.future[n * j_len..(n + 1) * j_len];
                let tgt = &target[n * j_len..(n + 1) * j_len];
                for j in 0..j_len {
                    let e = pred[j] - tgt[j][k];
                    loss += e * e * norm;
                    s.err[j] = 2.0 * norm * e;
                }
                for c in 0..c_len {
                    let d = self.basis.at(c, t);
                    let row = &mut s.grad_delta[c * j_len..(c + 1) * j_len];
                    for j in 0..j_len {
                        row[j] += d * s.err[j];
                    }
                }
            }
            let gb = &mut grad.bias[k * c_len * j_len..(k + 1) * c_len * j_len];
            for (g, v) in gb.iter_mut().zip(&s.grad_delta) {
                *g += weight * v;
            }

            // dW_j += h^T G
            for c in 0..c_len {
                let h = &s.mixed[c * j_len..(c + 1) * j_len];
                let gd = &s.grad_delta[c * j_len..(c + 1) * j_len];
                for i in 0..j_len {
                    let hi = weight * h[i];
                    let row = &mut grad.joint_mix[i * j_len..(i + 1) * j_len];
                    for j in 0..j_len {
                        row[j] += hi * gd[j];
                    }
                }
            }

            // Gh = G W_j^T ; dW_c += Gh c^T
            let wj = &self.params.joint_mix;
            for c in 0..c_len {
                let gd = &s.grad_delta[c * j_len..(c + 1) * j_len];
                let gh = &mut s.grad_mixed[c * j_len..(c + 1) * j_len];
                for i in 0..j_len {
                    let wrow = &wj[i * j_len..(i + 1) * j_len];
                    gh[i] = gd.iter().zip(wrow).map(|(a, b)| a * b).sum();
                }
            }
            for a in 0..c_len {
                let gh = &s.grad_mixed[a * j_len..(a + 1) * j_len];
                for b in 0..c_len {
                    let cb = &s.coeffs[b * j_len..(b + 1) * j_len];
                    let dot: f64 = gh.iter().zip(cb).map(|(x, y)| x * y).sum();
                    grad.coef_mix[a * c_len + b] += weight * dot;
                }
            }
        }
        Ok(loss)
    }

    /// Mean loss and gradient over a batch of windows.
    pub fn batch_loss_and_gradient<'a, I>(&self, windows: I) -> Result<(f64, Params)>
    where
        I: IntoIterator<Item = &'a [Vec3]>,
    {
        let windows: Vec<&[Vec3]> = windows.into_iter().collect();
        if windows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let weight = 1.0 / windows.len() as f64;
        let mut grad = Params::zeros(self.coefficients, self.joints);
        let mut scratch = Scratch::new(self.coefficients, self.joints, self.predicted);
        let mut loss = 0.0;
        for w in windows {
            loss += weight * self.accumulate(w, weight, &mut grad, &mut scratch)?;
        }
        Ok((loss, grad))
    }
}

struct Scratch {
    coeffs: Vec<f64>,
    mixed: Vec<f64>,
    delta: Vec<f64>,
    future: Vec<f64>,
    err: Vec<f64>,
    grad_delta: Vec<f64>,
    grad_mixed: Vec<f64>,
}

impl Scratch {
    fn new(coefficients: usize, joints: usize, predicted: usize) -> Self {
        let cj = coefficients * joints;
        Self {
            coeffs: vec![0.0; cj],
            mixed: vec![0.0; cj],
            delta: vec![0.0; cj],
            future: vec![0.0; predicted * joints],
            err: vec![0.0; joints],
            grad_delta: vec![0.0; cj],
            grad_mixed: vec![0.0; cj],
        }
    }
}

/// Repeats the last observed frame `predicted` times.
pub fn zero_velocity(observed: &[Vec3], joints: usize, predicted: usize) -> Vec<Vec3> {
    let last = &observed[observed.len() - joints..];
    let mut out = Vec::with_capacity(predicted * joints);
    for _ in 0..predicted {
        out.extend_from_slice(last);
    }
    out
}

/// Fixed-length windows sliced out of a set of motions.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub motions: Vec<Motion>,
    /// `(motion index, first frame)` per window.
    pub windows: Vec<(usize, usize)>,
    window_len: usize,
}

impl Dataset {
    pub fn new(window_len: usize) -> Self {
        Self {
            motions: Vec::new(),
            windows: Vec::new(),
            window_len,
        }
    }

    /// Adds every `stride`-spaced window of `motion`; returns how many.
    pub fn push_motion(&mut self, motion: Motion, stride: usize) -> usize {
        let idx = self.motions.len();
        let frames = motion.frame_count();
        self.motions.push(motion);
        if frames < self.window_len {
            return 0;
        }
        let before = self.windows.len();
        let stride = stride.max(1);
        for start in (0..=frames - self.window_len).step_by(stride) {
            self.windows.push((idx, start));
        }
        self.windows.len() - before
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    pub fn window(&self, i: usize) -> &[Vec3] {
        let (m, start) = self.windows[i];
        let motion = &self.motions[m];
        let j = motion.joint_count();
        &motion.data()[start * j..(start + self.window_len) * j]
    }

    /// Motion the `i`-th window was cut from.
    pub fn source_of(&self, i: usize) -> &Motion {
        &self.motions[self.windows[i].0]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Vec3]> + '_ {
        (0..self.len()).map(move |i| self.window(i))
    }

    /// Mean training loss of `model` over every window.
    pub fn mean_loss(&self, model: &PredictorModel) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut total = 0.0;
        for w in self.iter() {
            total += model.window_loss(w)?;
        }
        Ok(total / self.len() as f64)
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: PredictorModel,
    /// Mean batch loss per iteration.
    pub losses: Vec<f64>,
    /// `(iteration, loss)` at each validation check.
    pub validation: Vec<(usize, f64)>,
    /// Iteration whose parameters were returned.
    pub best_iteration: usize,
}

/// Mini-batch gradient descent (plain or Adam) on the mean squared joint
/// distance.
///
/// Batches are drawn uniformly with replacement from
/// `SplitMix64(derive_seed(config.seed, 0xBA7C4))`.
/// When `validation` is given, its mean loss is checked every
/// `validate_every` iterations and after the last one, and the parameters
/// with the lowest validation loss are returned.
pub fn train(
    dataset: &Dataset,
    config: &TrainConfig,
    validation: Option<&Dataset>,
) -> Result<TrainOutcome> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if dataset.window_len() != config.window_len() {
        return Err(Error::FrameCountMismatch {
            expected: config.window_len(),
            found: dataset.window_len(),
        });
    }
    let joints = dataset.motions[dataset.windows[0].0].joint_count();
    let mut model = PredictorModel::init(config, joints)?;
    let mut rng = SplitMix64::new(crate::rng::derive_seed(config.seed, 0xBA7C4));
    let mut losses = Vec::with_capacity(config.iterations);
    let mut checks = Vec::new();
    let mut best: Option<(f64, usize, Params)> = None;
    let validation = validation.filter(|v| !v.is_empty() && config.validate_every > 0);

    let mut check = |it: usize, model: &PredictorModel, best: &mut Option<(f64, usize, Params)>| -> Result<()> {
        if let Some(v) = validation {
            let loss = v.mean_loss(model)?;
            checks.push((it, loss));
            if best.as_ref().map_or(true, |b| loss < b.0) {
                *best = Some((loss, it, model.params.clone()));
            }
        }
        Ok(())
    };

    check(0, &model, &mut best)?;
    let mut step = Stepper::new(config.optimizer, &model.params);
    let mut batch = Vec::with_capacity(config.batch_size);
    for it in 0..config.iterations {
        batch.clear();
        for _ in 0..config.batch_size {
            batch.push(rng.below(dataset.len()));
        }
        let (loss, grad) = model.batch_loss_and_gradient(batch.iter().map(|&i| dataset.window(i)))?;
        if !loss.is_finite() || loss > DIVERGENCE_LIMIT {
            return Err(Error::NonFiniteLoss { iteration: it, loss });
        }
        losses.push(loss);
        step.apply(&mut model.params, &grad, config.learning_rate);
        let done = it + 1;
        if config.validate_every > 0 && (done % config.validate_every == 0 || done == config.iterations) {
            check(done, &model, &mut best)?;
        }
    }
    if !model.params.is_finite() {
        return Err(Error::NonFiniteLoss {
            iteration: config.iterations,
            loss: f64::NAN,
        });
    }
    let best_iteration = match best {
        Some((_, it, params)) => {
            model.params = params;
            it
        }
        None => config.iterations,
    };
    Ok(TrainOutcome {
        model,
        losses,
        validation: checks,
        best_iteration,
    })
}

struct Stepper {
    optimizer: Optimizer,
    first: Params,
    second: Params,
    t: i32,
}

impl Stepper {
    fn new(optimizer: Optimizer, like: &Params) -> Self {
        let mut zero = like.clone();
        zero.iter_mut().for_each(|v| *v = 0.0);
        Self {
            optimizer,
            first: zero.clone(),
            second: zero,
            t: 0,
        }
    }

    fn apply(&mut self, params: &mut Params, grad: &Params, lr: f64) {
        match self.optimizer {
            Optimizer::Sgd => params.add_scaled(grad, -lr),
            Optimizer::Adam { beta1, beta2, epsilon } => {
                self.t += 1;
                let c1 = 1.0 - libm::pow(beta1, self.t as f64);
                let c2 = 1.0 - libm::pow(beta2, self.t as f64);
                let moments = self.first.iter_mut().zip(self.second.iter_mut());
                for ((p, g), (m, v)) in params.iter_mut().zip(grad.iter()).zip(moments) {
                    *m = beta1 * *m + (1.0 - beta1) * g;
                    *v = beta2 * *v + (1.0 - beta2) * g * g;
                    *p -= lr * (*m / c1) / (libm::sqrt(*v / c2) + epsilon);
                }
            }
        }
    }
}

/// Largest relative discrepancy between `analytic` and central finite
/// differences of the window loss, over every parameter. The relative
/// error of one entry is `|a - n| / max(|a|, |n|, 1)`.
pub fn grad_check_against(
    model: &PredictorModel,
    window: &[Vec3],
    epsilon: f64,
    analytic: &Params,
) -> Result<f64> {
    let mut probe = model.clone();
    let count = model.params.len();
    let mut worst = 0.0f64;
    for idx in 0..count {
        let original = *param_mut(&mut probe.params, idx);
        *param_mut(&mut probe.params, idx) = original + epsilon;
        let plus = probe.window_loss(window)?;
        *param_mut(&mut probe.params, idx) = original - epsilon;
        let minus = probe.window_loss(window)?;
        *param_mut(&mut probe.params, idx) = original;
        let numeric = (plus - minus) / (2.0 * epsilon);
        let a = *analytic.iter().nth(idx).expect("gradient shape matches model");
        let denom = libm::fmax(libm::fmax(libm::fabs(a), libm::fabs(numeric)), 1.0);
        worst = libm::fmax(worst, libm::fabs(a - numeric) / denom);
    }
    Ok(worst)
}

/// [`grad_check_against`] using the model's own analytic gradient.
pub fn grad_check(model: &PredictorModel, window: &[Vec3], epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidConfig("epsilon must be positive"));
    }
    let (_, analytic) = model.loss_and_gradient(window)?;
    grad_check_against(model, window, epsilon, &analytic)
}

fn param_mut(p: &mut Params, idx: usize) -> &mut f64 {
    let a = p.coef_mix.len();
    let b = a + p.joint_mix.len();
    if idx < a {
        &mut p.coef_mix[idx]
    } else if idx < b {
        &mut p.joint_mix[idx - a]
    } else {
        &mut p.bias[idx - b]
    }
}
