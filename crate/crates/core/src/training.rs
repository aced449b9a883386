//! Reverse-mode differentiation through the unrolled network, RMSprop,
//! the epoch loop, evaluation, and finite-difference verification.
//!
//! The backward pass is hand-derived from the forward traces rather
//! than taped: softmax + cross-entropy collapse to `probs - onehot` at
//! the logits, attention and dropout are inverted analytically, and
//! each cell step is differentiated with the chained per-perspective
//! state handled explicitly (including the ModelB variant, whose cell
//! parts recur across instances instead of across perspectives). Its
//! sole correctness contract is agreement with central differences,
//! enforced by [`gradcheck`].

use crate::cells::{AblationKind, MpCellParams, StepTrace};
use crate::data::{split_batches, Dataset};
use crate::error::Error;
use crate::math::{self, RngState};
use crate::network::{
    forward_sample, score_fusion_predict, CellKind, ForwardTrace, ModelParams, NetworkConfig,
};

/// Gradient record: shape-congruent to the parameters it mirrors.
pub type ParamGrads = ModelParams;

/// Gradient flowing into a step's previous cell state. `Joint` for the
/// chained cells (one shared state), `Parts` for ModelB (one state per
/// perspective, of which the last is the joint state).
enum StateGrad {
    Joint(Vec<f64>),
    Parts(Vec<Vec<f64>>),
}

impl StateGrad {
    fn zeros(kind: AblationKind, m: usize, hidden: usize) -> Self {
        match kind {
            AblationKind::ModelB => StateGrad::Parts(vec![vec![0.0; hidden]; m]),
            _ => StateGrad::Joint(vec![0.0; hidden]),
        }
    }
}

/// First index of the maximum, ties broken toward the lowest class.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Backward through one cell step. `dh` is the loss gradient on the
/// step's hidden output; `dc_in` the gradient on its cell state(s) from
/// later steps. Accumulates parameter gradients into `grads` and
/// returns the gradients on the previous hidden state and cell state(s).
fn cell_step_backward(
    kind: AblationKind,
    params: &MpCellParams,
    trace: &StepTrace,
    dh: &[f64],
    dc_in: &StateGrad,
    grads: &mut MpCellParams,
) -> (Vec<f64>, StateGrad) {
    let m = params.num_perspectives();
    let hidden = params.hidden_dim;
    let t = &trace.tanh_c;

    // H = sum_p O_p ⊙ tanh(C): output gates and the tanh path
    let mut d_gate_o: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut o_sum = vec![0.0; hidden];
    for p in 0..m {
        d_gate_o.push(math::hadamard(dh, t));
        math::add_assign(&mut o_sum, &trace.gate_o[p]);
    }
    let mut d_c_final: Vec<f64> = (0..hidden)
        .map(|j| dh[j] * o_sum[j] * (1.0 - t[j] * t[j]))
        .collect();

    // incoming state gradients from later steps
    let mut d_parts: Vec<Vec<f64>> = vec![vec![0.0; hidden]; m];
    match dc_in {
        StateGrad::Joint(g) => math::add_assign(&mut d_c_final, g),
        StateGrad::Parts(gs) => {
            debug_assert_eq!(gs.len(), m);
            for (acc, g) in d_parts.iter_mut().zip(gs) {
                acc.clone_from(g);
            }
        }
    }
    math::add_assign(&mut d_parts[m - 1], &d_c_final);

    // fold gradients back down the perspective chain
    let mut d_prev_c = vec![0.0; hidden];
    let mut d_prev_parts: Option<Vec<Vec<f64>>> =
        (kind == AblationKind::ModelB).then(|| vec![vec![0.0; hidden]; m]);
    let mut d_gate_i: Vec<Vec<f64>> = vec![Vec::new(); m];
    let mut d_gate_f: Vec<Vec<f64>> = vec![Vec::new(); m];
    let mut d_candidate: Vec<Vec<f64>> = vec![Vec::new(); m];
    for p in (0..m).rev() {
        let dc = std::mem::take(&mut d_parts[p]);
        // c_p = F_p ⊙ carried + I_p ⊙ G_p
        let carried: Option<&[f64]> = if p == 0 {
            match kind {
                AblationKind::Full | AblationKind::ModelB => Some(&trace.prev_c),
                AblationKind::ModelA | AblationKind::ModelC => None,
            }
        } else {
            match kind {
                AblationKind::ModelB => Some(&trace.prev_parts.as_ref().unwrap()[p]),
                _ => Some(&trace.cell_parts[p - 1]),
            }
        };
        d_gate_f[p] = match carried {
            Some(carried) => math::hadamard(&dc, carried),
            None => vec![0.0; hidden],
        };
        d_gate_i[p] = math::hadamard(&dc, &trace.candidate[p]);
        d_candidate[p] = math::hadamard(&dc, &trace.gate_i[p]);
        // route the forget-gated carry to its source
        let through_forget = math::hadamard(&dc, &trace.gate_f[p]);
        if p == 0 {
            match kind {
                AblationKind::Full => math::add_assign(&mut d_prev_c, &through_forget),
                AblationKind::ModelB => {
                    // Eq. 6 carries the joint state, i.e. the last part
                    // of the previous instance
                    math::add_assign(&mut d_prev_parts.as_mut().unwrap()[m - 1], &through_forget);
                }
                AblationKind::ModelA | AblationKind::ModelC => {}
            }
        } else {
            match kind {
                AblationKind::ModelB => {
                    math::add_assign(&mut d_prev_parts.as_mut().unwrap()[p], &through_forget)
                }
                _ => math::add_assign(&mut d_parts[p - 1], &through_forget),
            }
        }
    }

    // gate pre-activations, parameter gradients, recurrent input grads
    let mut d_prev_h = vec![0.0; hidden];
    let mut d_peek = vec![0.0; hidden];
    for p in 0..m {
        let gp = &mut grads.perspectives[p];
        let pp = &params.perspectives[p];
        let gates = [
            (&trace.gate_i[p], &d_gate_i[p], &pp.input, &mut gp.input, true),
            (&trace.gate_f[p], &d_gate_f[p], &pp.forget, &mut gp.forget, true),
            (&trace.gate_o[p], &d_gate_o[p], &pp.output, &mut gp.output, true),
            (
                &trace.candidate[p],
                &d_candidate[p],
                &pp.candidate,
                &mut gp.candidate,
                false,
            ),
        ];
        for (act, d_act, gate, gate_grad, is_sigmoid) in gates {
            let dz: Vec<f64> = act
                .iter()
                .zip(d_act.iter())
                .map(|(&a, &da)| {
                    if is_sigmoid {
                        da * a * (1.0 - a)
                    } else {
                        da * (1.0 - a * a)
                    }
                })
                .collect();
            gate_grad.w_s.add_outer(&dz, &trace.inputs[p]);
            gate_grad.w_h.add_outer(&dz, &trace.prev_h);
            gate_grad.w_c.add_outer(&dz, &trace.peek_c);
            math::add_assign(&mut gate_grad.b, &dz);
            math::add_assign(&mut d_prev_h, &gate.w_h.tr_mul_vec(&dz));
            math::add_assign(&mut d_peek, &gate.w_c.tr_mul_vec(&dz));
        }
    }
    // the peepholes read the previous joint cell state except in
    // ModelC, where they read a constant zero vector
    if kind != AblationKind::ModelC {
        math::add_assign(&mut d_prev_c, &d_peek);
    }

    let d_prev_state = match d_prev_parts {
        Some(mut parts) => {
            math::add_assign(&mut parts[m - 1], &d_prev_c);
            StateGrad::Parts(parts)
        }
        None => StateGrad::Joint(d_prev_c),
    };
    (d_prev_h, d_prev_state)
}

/// BPTT over one direction. `steps` and `d_hs` are in processing
/// order; parameter gradients accumulate into `grads`.
fn direction_backward(
    kind: AblationKind,
    params: &MpCellParams,
    steps: &[StepTrace],
    d_hs: &[Vec<f64>],
    grads: &mut MpCellParams,
) {
    let m = params.num_perspectives();
    let hidden = params.hidden_dim;
    let mut d_h_carry = vec![0.0; hidden];
    let mut d_state = StateGrad::zeros(kind, m, hidden);
    for (trace, d_h_ext) in steps.iter().zip(d_hs).rev() {
        let mut dh = d_h_ext.clone();
        math::add_assign(&mut dh, &d_h_carry);
        let (dph, dps) = cell_step_backward(kind, params, trace, &dh, &d_state, grads);
        d_h_carry = dph;
        d_state = dps;
    }
}

/// Exact gradients of the cross-entropy loss w.r.t. every parameter,
/// from a trace produced by [`forward_sample`] on the same params.
pub fn backward(
    trace: &ForwardTrace,
    label: usize,
    params: &ModelParams,
    config: &NetworkConfig,
) -> ParamGrads {
    let n = trace.hs.len();
    assert!(n > 0, "backward: empty trace");
    assert_eq!(
        trace.fwd_steps.len(),
        n,
        "backward: trace/params mismatch (step count)"
    );
    assert_eq!(
        params.bwd.is_some(),
        trace.bwd_steps.is_some(),
        "backward: trace/params mismatch (directionality)"
    );
    assert!(
        label < trace.probs.len(),
        "backward: label {label} out of range for {} classes",
        trace.probs.len()
    );
    let hidden = params.fwd.hidden_dim;
    let h2 = trace.hs[0].len();
    let mut grads = params.zeros_like();

    // softmax + cross-entropy at the logits
    let mut d_logits = trace.probs.clone();
    d_logits[label] -= 1.0;
    grads.head.out_w.add_outer(&d_logits, &trace.context);
    math::add_assign(&mut grads.head.out_b, &d_logits);
    let d_context = params.head.out_w.tr_mul_vec(&d_logits);

    // pooling: context = sum_i alpha_i u_i
    let mut d_pooled: Vec<Vec<f64>> = trace
        .attn_weights
        .iter()
        .map(|&a| d_context.iter().map(|&dc| a * dc).collect())
        .collect();
    if let Some(attn) = &trace.attn {
        let d_alpha: Vec<f64> = trace
            .pooled_inputs
            .iter()
            .map(|u| u.iter().zip(&d_context).map(|(&a, &b)| a * b).sum())
            .collect();
        let dot: f64 = trace
            .attn_weights
            .iter()
            .zip(&d_alpha)
            .map(|(&a, &da)| a * da)
            .sum();
        for i in 0..n {
            let d_score = trace.attn_weights[i] * (d_alpha[i] - dot);
            let q = &attn.tanh_scores[i];
            for (gv, &qj) in grads.head.attn_v.iter_mut().zip(q) {
                *gv += d_score * qj;
            }
            let dr: Vec<f64> = q
                .iter()
                .zip(&params.head.attn_v)
                .map(|(&qj, &vj)| d_score * vj * (1.0 - qj * qj))
                .collect();
            grads.head.attn_w.add_outer(&dr, &trace.pooled_inputs[i]);
            math::add_assign(&mut grads.head.attn_b, &dr);
            math::add_assign(&mut d_pooled[i], &params.head.attn_w.tr_mul_vec(&dr));
        }
    }
    // with attention off, alpha is the constant 1/n: nothing extra flows

    // dropout: the mask is the elementwise derivative
    let d_hs: Vec<Vec<f64>> = match &trace.dropout_mask {
        Some(mask) => d_pooled
            .iter()
            .zip(mask)
            .map(|(d, m)| math::hadamard(d, m))
            .collect(),
        None => d_pooled,
    };

    let kind = match config.cell_kind {
        CellKind::Mp | CellKind::Vanilla => AblationKind::Full,
        CellKind::Ablation(k) => k,
    };

    match (&params.bwd, &trace.bwd_steps) {
        (Some(bwd_params), Some(bwd_steps)) => {
            assert_eq!(h2, 2 * hidden, "backward: trace width vs hidden dims");
            let mut d_fwd = Vec::with_capacity(n);
            let mut d_bwd_aligned = Vec::with_capacity(n);
            for d in &d_hs {
                d_fwd.push(d[..hidden].to_vec());
                d_bwd_aligned.push(d[hidden..].to_vec());
            }
            // backward-direction step j consumed instance n-1-j
            let d_bwd: Vec<Vec<f64>> = (0..n).map(|j| d_bwd_aligned[n - 1 - j].clone()).collect();
            direction_backward(kind, &params.fwd, &trace.fwd_steps, &d_fwd, &mut grads.fwd);
            direction_backward(
                kind,
                bwd_params,
                bwd_steps,
                &d_bwd,
                grads.bwd.as_mut().unwrap(),
            );
        }
        (None, None) => {
            assert_eq!(h2, hidden, "backward: trace width vs hidden dim");
            direction_backward(kind, &params.fwd, &trace.fwd_steps, &d_hs, &mut grads.fwd);
        }
        _ => unreachable!(),
    }

    grads
}

/// RMSprop: `v <- rho v + (1 - rho) g^2`, `theta -= lr g / (sqrt(v) + eps)`.
#[derive(Debug, Clone)]
pub struct RmsProp {
    pub lr: f64,
    pub rho: f64,
    pub epsilon: f64,
    v: ModelParams,
}

impl RmsProp {
    pub fn new(params: &ModelParams, lr: f64, rho: f64, epsilon: f64) -> Self {
        RmsProp {
            lr,
            rho,
            epsilon,
            v: params.zeros_like(),
        }
    }

    /// Accumulator values (squared-gradient moving average).
    pub fn accumulator(&self) -> &ModelParams {
        &self.v
    }

    pub fn step(&mut self, params: &mut ModelParams, grads: &ParamGrads) {
        let mut pts = params.tensors_mut();
        let gts = grads.tensors();
        let mut vts = self.v.tensors_mut();
        assert_eq!(pts.len(), gts.len(), "rmsprop: param/grad tensor count");
        for ((pt, gt), vt) in pts.iter_mut().zip(&gts).zip(vts.iter_mut()) {
            assert_eq!(pt.len(), gt.len(), "rmsprop: param/grad tensor shape");
            for ((theta, &g), v) in pt.iter_mut().zip(gt.iter()).zip(vt.iter_mut()) {
                *v = self.rho * *v + (1.0 - self.rho) * g * g;
                *theta -= self.lr * g / (v.sqrt() + self.epsilon);
            }
        }
    }
}

/// Training-loop hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub num_epochs: usize,
    pub lr: f64,
    pub rho: f64,
    pub epsilon: f64,
    pub dropout_rate: f64,
    pub seed: u64,
    /// Validation metrics are refreshed every this many epochs.
    pub eval_cadence: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 32,
            num_epochs: 50,
            lr: 1e-3,
            rho: 0.9,
            epsilon: 1e-8,
            dropout_rate: 0.1,
            seed: 42,
            eval_cadence: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be >= 1".into()));
        }
        if self.num_epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::InvalidConfig(format!(
                "dropout_rate {} outside [0, 1)",
                self.dropout_rate
            )));
        }
        if self.eval_cadence == 0 {
            return Err(Error::InvalidConfig("eval_cadence must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    pub loss: f64,
    pub accuracy: f64,
}

/// One pass over the data: shuffle, mean-gradient mini-batches, one
/// RMSprop step per batch, fresh dropout mask per sample. Returns the
/// metrics observed during the pass itself (with dropout active).
pub fn train_epoch(
    params: &mut ModelParams,
    config: &NetworkConfig,
    data: &Dataset,
    batch_size: usize,
    opt: &mut RmsProp,
    rng: &mut RngState,
) -> Result<EpochMetrics, Error> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let batches = split_batches(data, batch_size, rng);
    let mut total_loss = 0.0;
    let mut correct = 0usize;
    for batch in &batches {
        let mut grads = params.zeros_like();
        for &idx in batch {
            let sample = &data.samples[idx];
            let trace = forward_sample(params, config, sample, Some(rng))?;
            total_loss += crate::network::cross_entropy(&trace.probs, sample.label);
            correct += (argmax(&trace.probs) == sample.label) as usize;
            let sample_grads = backward(&trace, sample.label, params, config);
            accumulate(&mut grads, &sample_grads, 1.0);
        }
        scale(&mut grads, 1.0 / batch.len() as f64);
        opt.step(params, &grads);
    }
    Ok(EpochMetrics {
        loss: total_loss / data.len() as f64,
        accuracy: correct as f64 / data.len() as f64,
    })
}

/// `acc += w * g` across all tensors.
pub fn accumulate(acc: &mut ParamGrads, g: &ParamGrads, w: f64) {
    let mut ats = acc.tensors_mut();
    let gts = g.tensors();
    for (at, gt) in ats.iter_mut().zip(&gts) {
        for (a, &b) in at.iter_mut().zip(gt.iter()) {
            *a += w * b;
        }
    }
}

/// `acc *= w` across all tensors.
pub fn scale(acc: &mut ParamGrads, w: f64) {
    for t in acc.tensors_mut() {
        for v in t {
            *v *= w;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalMetrics {
    pub loss: f64,
    pub accuracy: f64,
    /// `confusion[true_label][predicted]` counts.
    pub confusion: Vec<Vec<usize>>,
}

/// Deterministic evaluation: dropout disabled, mean loss and accuracy
/// plus per-class confusion counts.
pub fn evaluate(
    params: &ModelParams,
    config: &NetworkConfig,
    data: &Dataset,
) -> Result<EvalMetrics, Error> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let k = config.num_classes;
    let mut confusion = vec![vec![0usize; k]; k];
    let mut total_loss = 0.0;
    let mut correct = 0usize;
    for sample in &data.samples {
        let trace = forward_sample(params, config, sample, None)?;
        total_loss += crate::network::cross_entropy(&trace.probs, sample.label);
        let pred = argmax(&trace.probs);
        confusion[sample.label][pred] += 1;
        correct += (pred == sample.label) as usize;
    }
    Ok(EvalMetrics {
        loss: total_loss / data.len() as f64,
        accuracy: correct as f64 / data.len() as f64,
        confusion,
    })
}

/// Evaluation of a score-fusion ensemble (averaged distributions).
pub fn evaluate_score_fusion(
    models: &[ModelParams],
    config: &NetworkConfig,
    data: &Dataset,
) -> Result<EvalMetrics, Error> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let k = config.num_classes;
    let mut confusion = vec![vec![0usize; k]; k];
    let mut total_loss = 0.0;
    let mut correct = 0usize;
    for sample in &data.samples {
        let probs = score_fusion_predict(models, config, sample)?;
        total_loss += crate::network::cross_entropy(&probs, sample.label);
        let pred = argmax(&probs);
        confusion[sample.label][pred] += 1;
        correct += (pred == sample.label) as usize;
    }
    Ok(EvalMetrics {
        loss: total_loss / data.len() as f64,
        accuracy: correct as f64 / data.len() as f64,
        confusion,
    })
}

/// One cell of the gradient-check grid.
#[derive(Debug, Clone)]
pub struct GradCheckCase {
    pub kind: AblationKind,
    pub num_perspectives: usize,
    pub hidden_dim: usize,
    pub seq_len: usize,
    pub bidirectional: bool,
    pub max_rel_err: f64,
    pub worst_tensor: String,
}

impl GradCheckCase {
    pub fn describe(&self) -> String {
        format!(
            "kind={:?} m={} hidden={} n={} {} max_rel_err={:.3e} worst={}",
            self.kind,
            self.num_perspectives,
            self.hidden_dim,
            self.seq_len,
            if self.bidirectional { "bi " } else { "uni" },
            self.max_rel_err,
            self.worst_tensor
        )
    }
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub cases: Vec<GradCheckCase>,
    pub threshold: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.max_rel_err < self.threshold)
    }

    pub fn max_rel_err(&self) -> f64 {
        self.cases.iter().map(|c| c.max_rel_err).fold(0.0, f64::max)
    }
}

pub const GRADCHECK_THRESHOLD: f64 = 1e-4;
const GRADCHECK_STEP: f64 = 1e-5;
/// Denominator floor of the relative error. A central difference at
/// h = 1e-5 carries irreducible loss-rounding noise of about
/// ulp(L)/(2h) ~ 1e-11, so gradient elements smaller than
/// noise/threshold ~ 1e-7 would flag spuriously on an absolute-exact
/// implementation; the floor absorbs that band. A wrong gradient of
/// any magnitude still disagrees by far more than floor * threshold.
const GRADCHECK_DENOM_FLOOR: f64 = 1e-6;

fn loss_of(params: &ModelParams, config: &NetworkConfig, sample: &crate::network::SequenceSample) -> f64 {
    let trace = forward_sample(params, config, sample, None).expect("gradcheck forward");
    crate::network::cross_entropy(&trace.probs, sample.label)
}

/// Checks one configuration: analytic gradients against central
/// differences over every parameter scalar. Dropout is disabled.
pub fn gradcheck_case(
    kind: AblationKind,
    num_perspectives: usize,
    hidden_dim: usize,
    seq_len: usize,
    bidirectional: bool,
    rng: &mut RngState,
) -> GradCheckCase {
    let config = NetworkConfig {
        cell_kind: CellKind::Ablation(kind),
        fusion_mode: crate::network::FusionMode::Joint,
        bidirectional,
        hidden_dim,
        num_perspectives,
        input_dim: 2,
        num_classes: 3,
        attention: true,
        dropout_rate: 0.0,
    };
    let mut params = ModelParams::init(&config, rng);
    let sample = crate::network::SequenceSample {
        perspectives: (0..num_perspectives)
            .map(|_| {
                (0..seq_len)
                    .map(|_| (0..2).map(|_| rng.uniform() * 2.0 - 1.0).collect())
                    .collect()
            })
            .collect(),
        label: rng.below(3) as usize,
    };

    let trace = forward_sample(&params, &config, &sample, None).expect("gradcheck forward");
    let analytic = backward(&trace, sample.label, &params, &config);
    let names = params.tensor_names();

    let mut max_rel = 0.0;
    let mut worst = String::from("-");
    for (t_idx, name) in names.iter().enumerate() {
        let len = analytic.tensors()[t_idx].len();
        for j in 0..len {
            let orig = params.tensors()[t_idx][j];
            params.tensors_mut()[t_idx][j] = orig + GRADCHECK_STEP;
            let plus = loss_of(&params, &config, &sample);
            params.tensors_mut()[t_idx][j] = orig - GRADCHECK_STEP;
            let minus = loss_of(&params, &config, &sample);
            params.tensors_mut()[t_idx][j] = orig;
            let numeric = (plus - minus) / (2.0 * GRADCHECK_STEP);
            let a = analytic.tensors()[t_idx][j];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(GRADCHECK_DENOM_FLOOR);
            if rel > max_rel {
                max_rel = rel;
                worst = format!("{name}[{j}]");
            }
        }
    }

    GradCheckCase {
        kind,
        num_perspectives,
        hidden_dim,
        seq_len,
        bidirectional,
        max_rel_err: max_rel,
        worst_tensor: worst,
    }
}

/// Runs the full verification grid: m in {1,2,3}, hidden in {1,4},
/// n in {1,5}, both directions, all four cell kinds, attention on.
pub fn gradcheck(seed: u64) -> GradCheckReport {
    let mut rng = RngState::new(seed);
    let mut cases = Vec::new();
    for kind in [
        AblationKind::Full,
        AblationKind::ModelA,
        AblationKind::ModelB,
        AblationKind::ModelC,
    ] {
        for m in [1usize, 2, 3] {
            for hidden in [1usize, 4] {
                for n in [1usize, 5] {
                    for bidir in [false, true] {
                        let mut case_rng = rng.split();
                        cases.push(gradcheck_case(kind, m, hidden, n, bidir, &mut case_rng));
                    }
                }
            }
        }
    }
    GradCheckReport {
        cases,
        threshold: GRADCHECK_THRESHOLD,
    }
}
