//! Sequence networks built from the cells: uni- and bi-directional
//! unrolling over synchronized multi-perspective samples, feature- and
//! score-level fusion baselines, soft-attention pooling, and the
//! softmax classifier head.
//!
//! A forward pass retains everything backpropagation needs in a
//! [`ForwardTrace`]; inference callers can ignore it.

use crate::cells::{
    ablation_cell_step, AblationKind, MpCellParams, StepState, StepTrace,
};
use crate::error::Error;
use crate::math::{self, Mat, RngState};

/// Which cell the network unrolls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    Mp,
    Vanilla,
    Ablation(AblationKind),
}

impl CellKind {
    /// Every cell is a special case of the ablation-aware step.
    fn effective(self) -> AblationKind {
        match self {
            CellKind::Mp | CellKind::Vanilla => AblationKind::Full,
            CellKind::Ablation(k) => k,
        }
    }
}

/// How the perspectives reach the recurrent stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FusionMode {
    /// All perspectives enter one joint cell (the multi-perspective path).
    Joint,
    /// Early fusion: instances concatenated along the feature axis,
    /// one vanilla network of input dim `m * d`.
    FeatureConcatDim,
    /// Early fusion: perspective sequences appended end-to-end, one
    /// vanilla network over `m * n` instances.
    FeatureConcatTime,
    /// Late fusion: independent vanilla networks per perspective,
    /// class distributions averaged.
    Score,
}

/// One labelled multi-perspective sample: `m` synchronized sequences of
/// `n` instances, each a `d`-dimensional feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSample {
    /// Indexed `[perspective][instance][feature]`.
    pub perspectives: Vec<Vec<Vec<f64>>>,
    pub label: usize,
}

impl SequenceSample {
    /// Structural validation: nonempty, rectangular, consistent dims.
    pub fn validate(&self) -> Result<(), Error> {
        if self.perspectives.is_empty() {
            return Err(Error::EmptyPerspectives);
        }
        let n = self.perspectives[0].len();
        if n == 0 {
            return Err(Error::EmptySequence);
        }
        let d = self.perspectives[0][0].len();
        for (p, seq) in self.perspectives.iter().enumerate() {
            if seq.len() != n {
                return Err(Error::RaggedLengths {
                    perspective: p,
                    expected: n,
                    got: seq.len(),
                });
            }
            for (i, inst) in seq.iter().enumerate() {
                if inst.len() != d {
                    return Err(Error::FeatureDimMismatch {
                        perspective: p,
                        instance: i,
                        expected: d,
                        got: inst.len(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn num_perspectives(&self) -> usize {
        self.perspectives.len()
    }

    pub fn seq_len(&self) -> usize {
        self.perspectives[0].len()
    }

    pub fn feature_dim(&self) -> usize {
        self.perspectives[0][0].len()
    }

    /// Single-perspective view of this sample (for score fusion).
    pub fn extract_view(&self, p: usize) -> SequenceSample {
        SequenceSample {
            perspectives: vec![self.perspectives[p].clone()],
            label: self.label,
        }
    }
}

/// Static description of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub cell_kind: CellKind,
    pub fusion_mode: FusionMode,
    pub bidirectional: bool,
    pub hidden_dim: usize,
    pub num_perspectives: usize,
    pub input_dim: usize,
    pub num_classes: usize,
    pub attention: bool,
    pub dropout_rate: f64,
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.num_perspectives == 0 {
            return Err(Error::InvalidConfig("num_perspectives must be >= 1".into()));
        }
        if self.hidden_dim == 0 {
            return Err(Error::InvalidConfig("hidden_dim must be >= 1".into()));
        }
        if self.input_dim == 0 {
            return Err(Error::InvalidConfig("input_dim must be >= 1".into()));
        }
        if self.num_classes < 2 {
            return Err(Error::InvalidConfig("num_classes must be >= 2".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::InvalidConfig(format!(
                "dropout_rate {} outside [0, 1)",
                self.dropout_rate
            )));
        }
        match (self.fusion_mode, self.cell_kind) {
            (FusionMode::Joint, CellKind::Mp | CellKind::Ablation(_)) => Ok(()),
            (FusionMode::Joint, CellKind::Vanilla) => Err(Error::InvalidConfig(
                "joint fusion requires the multi-perspective or an ablation cell".into(),
            )),
            (_, CellKind::Vanilla) => Ok(()),
            (mode, _) => Err(Error::InvalidConfig(format!(
                "{mode:?} fusion requires the vanilla cell"
            ))),
        }
    }

    /// Perspectives seen by the cell (1 after early fusion).
    pub fn cell_perspectives(&self) -> usize {
        match self.fusion_mode {
            FusionMode::Joint => self.num_perspectives,
            _ => 1,
        }
    }

    /// Input dim seen by the cell.
    pub fn cell_input_dim(&self) -> usize {
        match self.fusion_mode {
            FusionMode::FeatureConcatDim => self.num_perspectives * self.input_dim,
            _ => self.input_dim,
        }
    }

    /// Per-instance output width: hidden, doubled when bidirectional.
    pub fn head_input_dim(&self) -> usize {
        self.hidden_dim * if self.bidirectional { 2 } else { 1 }
    }

    /// Attention score width.
    pub fn attention_dim(&self) -> usize {
        self.hidden_dim
    }

    /// Config of one score-fusion sub-network (vanilla, one view).
    pub fn score_submodel(&self) -> NetworkConfig {
        NetworkConfig {
            cell_kind: CellKind::Vanilla,
            fusion_mode: FusionMode::FeatureConcatDim,
            num_perspectives: 1,
            ..self.clone()
        }
    }
}

/// Attention scorer plus softmax classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadParams {
    /// Score matrix, `attention_dim x head_input_dim`.
    pub attn_w: Mat,
    /// Score vector, `attention_dim`.
    pub attn_v: Vec<f64>,
    /// Score bias, `attention_dim`.
    pub attn_b: Vec<f64>,
    /// Classifier weights, `num_classes x head_input_dim`.
    pub out_w: Mat,
    pub out_b: Vec<f64>,
}

impl HeadParams {
    pub fn zeros(config: &NetworkConfig) -> Self {
        let h2 = config.head_input_dim();
        let a = config.attention_dim();
        HeadParams {
            attn_w: Mat::zeros(a, h2),
            attn_v: vec![0.0; a],
            attn_b: vec![0.0; a],
            out_w: Mat::zeros(config.num_classes, h2),
            out_b: vec![0.0; config.num_classes],
        }
    }

    pub fn glorot(rng: &mut RngState, config: &NetworkConfig) -> Self {
        let h2 = config.head_input_dim();
        let a = config.attention_dim();
        HeadParams {
            attn_w: math::init_glorot(rng, a, h2),
            attn_v: math::init_glorot(rng, 1, a).data().to_vec(),
            attn_b: vec![0.0; a],
            out_w: math::init_glorot(rng, config.num_classes, h2),
            out_b: vec![0.0; config.num_classes],
        }
    }
}

/// Every trainable tensor of one network: forward cell, optional
/// backward cell, head.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub fwd: MpCellParams,
    pub bwd: Option<MpCellParams>,
    pub head: HeadParams,
}

impl ModelParams {
    /// Glorot weights, zero biases, drawn in a fixed documented order:
    /// forward cell, backward cell (if any), head.
    pub fn init(config: &NetworkConfig, rng: &mut RngState) -> Self {
        let m = config.cell_perspectives();
        let d = config.cell_input_dim();
        let fwd = MpCellParams::glorot(rng, m, d, config.hidden_dim);
        let bwd = config
            .bidirectional
            .then(|| MpCellParams::glorot(rng, m, d, config.hidden_dim));
        let head = HeadParams::glorot(rng, config);
        ModelParams { fwd, bwd, head }
    }

    pub fn zeros(config: &NetworkConfig) -> Self {
        let m = config.cell_perspectives();
        let d = config.cell_input_dim();
        ModelParams {
            fwd: MpCellParams::zeros(m, d, config.hidden_dim),
            bwd: config
                .bidirectional
                .then(|| MpCellParams::zeros(m, d, config.hidden_dim)),
            head: HeadParams::zeros(config),
        }
    }

    /// Shape-congruent all-zeros copy (gradient / optimizer storage).
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for t in z.tensors_mut() {
            for v in t {
                *v = 0.0;
            }
        }
        z
    }

    /// All tensors in the canonical order used for serialization,
    /// optimizer state, and gradient reports: per direction, per
    /// perspective, gates input/forget/output/candidate, each as
    /// `w_s, w_h, w_c, b`; then `attn_w, attn_v, attn_b, out_w, out_b`.
    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out = Vec::new();
        for cell in std::iter::once(&self.fwd).chain(self.bwd.iter()) {
            for pp in &cell.perspectives {
                for gate in [&pp.input, &pp.forget, &pp.output, &pp.candidate] {
                    out.push(gate.w_s.data());
                    out.push(gate.w_h.data());
                    out.push(gate.w_c.data());
                    out.push(gate.b.as_slice());
                }
            }
        }
        out.push(self.head.attn_w.data());
        out.push(self.head.attn_v.as_slice());
        out.push(self.head.attn_b.as_slice());
        out.push(self.head.out_w.data());
        out.push(self.head.out_b.as_slice());
        out
    }

    /// Mutable view in the same canonical order.
    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::new();
        for cell in std::iter::once(&mut self.fwd).chain(self.bwd.iter_mut()) {
            for pp in &mut cell.perspectives {
                for gate in [
                    &mut pp.input,
                    &mut pp.forget,
                    &mut pp.output,
                    &mut pp.candidate,
                ] {
                    out.push(gate.w_s.data_mut());
                    out.push(gate.w_h.data_mut());
                    out.push(gate.w_c.data_mut());
                    out.push(gate.b.as_mut_slice());
                }
            }
        }
        out.push(self.head.attn_w.data_mut());
        out.push(self.head.attn_v.as_mut_slice());
        out.push(self.head.attn_b.as_mut_slice());
        out.push(self.head.out_w.data_mut());
        out.push(self.head.out_b.as_mut_slice());
        out
    }

    /// Tensor labels aligned with [`ModelParams::tensors`].
    pub fn tensor_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        let dirs: Vec<(&str, &MpCellParams)> = std::iter::once(("fwd", &self.fwd))
            .chain(self.bwd.iter().map(|b| ("bwd", b)))
            .collect();
        for (dir, cell) in dirs {
            for p in 0..cell.num_perspectives() {
                for gate in ["input", "forget", "output", "candidate"] {
                    for tensor in ["w_s", "w_h", "w_c", "b"] {
                        out.push(format!("{dir}.p{p}.{gate}.{tensor}"));
                    }
                }
            }
        }
        for name in ["attn_w", "attn_v", "attn_b", "out_w", "out_b"] {
            out.push(format!("head.{name}"));
        }
        out
    }

    pub fn num_scalars(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }
}

/// Attention internals kept for backpropagation.
#[derive(Debug, Clone, PartialEq)]
pub struct AttnTrace {
    /// `tanh(W_a u_i + b_a)` per instance.
    pub tanh_scores: Vec<Vec<f64>>,
    /// Raw scores `v . tanh_scores[i]`.
    pub scores: Vec<f64>,
}

/// Complete record of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    /// Forward-direction step traces in processing order.
    pub fwd_steps: Vec<StepTrace>,
    /// Backward-direction step traces in processing order (step `j`
    /// consumed instance `n - 1 - j`).
    pub bwd_steps: Option<Vec<StepTrace>>,
    /// Per-instance outputs, concatenated across directions (pre-dropout).
    pub hs: Vec<Vec<f64>>,
    /// Multiplicative inverted-dropout mask (0 or 1/(1-rate)); `None`
    /// at inference.
    pub dropout_mask: Option<Vec<Vec<f64>>>,
    /// What the pooling stage actually saw (`hs` after dropout).
    pub pooled_inputs: Vec<Vec<f64>>,
    /// `None` when attention is disabled (uniform mean pooling).
    pub attn: Option<AttnTrace>,
    pub attn_weights: Vec<f64>,
    pub context: Vec<f64>,
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
}

/// Runs one direction over pre-fused views, returning step traces and
/// per-step hidden outputs in processing order.
fn run_direction(
    kind: AblationKind,
    params: &MpCellParams,
    views: &[Vec<Vec<f64>>],
    reverse: bool,
) -> (Vec<StepTrace>, Vec<Vec<f64>>) {
    let m = views.len();
    let n = views[0].len();
    let hidden = params.hidden_dim;
    let mut state = StepState::zeros(hidden);
    let mut parts: Option<Vec<Vec<f64>>> =
        (kind == AblationKind::ModelB).then(|| vec![vec![0.0; hidden]; m]);
    let mut traces = Vec::with_capacity(n);
    let mut hs = Vec::with_capacity(n);
    for step in 0..n {
        let i = if reverse { n - 1 - step } else { step };
        let inputs: Vec<Vec<f64>> = views.iter().map(|v| v[i].clone()).collect();
        let (next, trace) = ablation_cell_step(kind, params, &inputs, &state, parts.as_deref());
        if let Some(parts) = parts.as_mut() {
            parts.clone_from(&trace.cell_parts);
        }
        state = next;
        hs.push(state.h.clone());
        traces.push(trace);
    }
    (traces, hs)
}

fn check_cell_sample(params: &MpCellParams, sample: &SequenceSample) -> Result<(), Error> {
    sample.validate()?;
    if sample.num_perspectives() != params.num_perspectives() {
        return Err(Error::PerspectiveCountMismatch {
            expected: params.num_perspectives(),
            got: sample.num_perspectives(),
        });
    }
    if sample.feature_dim() != params.input_dim {
        return Err(Error::FeatureDimMismatch {
            perspective: 0,
            instance: 0,
            expected: params.input_dim,
            got: sample.feature_dim(),
        });
    }
    Ok(())
}

/// Unrolls one direction from zero state; returns `[H_1 .. H_n]`.
pub fn unroll(
    params: &MpCellParams,
    config: &NetworkConfig,
    sample: &SequenceSample,
) -> Result<Vec<Vec<f64>>, Error> {
    check_cell_sample(params, sample)?;
    let (_, hs) = run_direction(
        config.cell_kind.effective(),
        params,
        &sample.perspectives,
        false,
    );
    Ok(hs)
}

/// Forward and backward unrolls concatenated per instance: output `i`
/// is `[H_fwd_i ; H_bwd_i]`, where the backward half comes from the
/// pass that consumed instances `n..1` and is aligned back to `i`.
pub fn bidirectional_unroll(
    params_fwd: &MpCellParams,
    params_bwd: &MpCellParams,
    config: &NetworkConfig,
    sample: &SequenceSample,
) -> Result<Vec<Vec<f64>>, Error> {
    check_cell_sample(params_fwd, sample)?;
    check_cell_sample(params_bwd, sample)?;
    let kind = config.cell_kind.effective();
    let (_, fwd) = run_direction(kind, params_fwd, &sample.perspectives, false);
    let (_, bwd) = run_direction(kind, params_bwd, &sample.perspectives, true);
    let n = fwd.len();
    Ok((0..n)
        .map(|i| {
            let mut v = fwd[i].clone();
            v.extend_from_slice(&bwd[n - 1 - i]);
            v
        })
        .collect())
}

/// Additive soft attention: `score_i = v . tanh(W h_i + b)`, weights
/// through softmax, context the weighted sum.
pub fn attention_pool(head: &HeadParams, hs: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    assert!(!hs.is_empty(), "attention_pool: empty sequence");
    let scores: Vec<f64> = hs
        .iter()
        .map(|h| {
            let t = math::tanh_act(&math::affine(&head.attn_w, h, &head.attn_b));
            t.iter().zip(&head.attn_v).map(|(&a, &b)| a * b).sum()
        })
        .collect();
    let weights = math::softmax(&scores);
    let context = weighted_sum(hs, &weights);
    (context, weights)
}

fn weighted_sum(hs: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; hs[0].len()];
    for (h, &w) in hs.iter().zip(weights) {
        for (o, &v) in out.iter_mut().zip(h) {
            *o += w * v;
        }
    }
    out
}

/// Linear classifier over the context vector, softmax-normalized.
pub fn classify(head: &HeadParams, context: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let logits = math::affine(&head.out_w, context, &head.out_b);
    let probs = math::softmax(&logits);
    (logits, probs)
}

/// `-ln p[label]`, with the probability clamped below at 1e-12.
pub fn cross_entropy(probs: &[f64], label: usize) -> f64 {
    assert!(
        label < probs.len(),
        "cross_entropy: label {label} out of range for {} classes",
        probs.len()
    );
    -probs[label].max(1e-12).ln()
}

/// Applies the fusion mode, producing the views the cell actually sees.
pub fn fuse_sample(mode: FusionMode, sample: &SequenceSample) -> Vec<Vec<Vec<f64>>> {
    match mode {
        FusionMode::Joint => sample.perspectives.clone(),
        FusionMode::FeatureConcatDim => {
            let n = sample.seq_len();
            let fused: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    let mut inst = Vec::new();
                    for view in &sample.perspectives {
                        inst.extend_from_slice(&view[i]);
                    }
                    inst
                })
                .collect();
            vec![fused]
        }
        FusionMode::FeatureConcatTime => {
            let mut fused = Vec::with_capacity(sample.num_perspectives() * sample.seq_len());
            for view in &sample.perspectives {
                fused.extend(view.iter().cloned());
            }
            vec![fused]
        }
        FusionMode::Score => {
            panic!("fuse_sample: score fusion is an ensemble, forward each sub-model separately")
        }
    }
}

/// Full forward pass: fusion, recurrent stack, dropout (train mode
/// only), pooling, classifier. Pass a dropout RNG to sample a fresh
/// inverted-dropout mask; pass `None` for deterministic inference.
pub fn forward_sample(
    params: &ModelParams,
    config: &NetworkConfig,
    sample: &SequenceSample,
    dropout_rng: Option<&mut RngState>,
) -> Result<ForwardTrace, Error> {
    config.validate()?;
    if config.fusion_mode == FusionMode::Score {
        return Err(Error::InvalidConfig(
            "score fusion forwards one sub-model per perspective; use score_fusion_predict".into(),
        ));
    }
    sample.validate()?;
    if sample.num_perspectives() != config.num_perspectives {
        return Err(Error::PerspectiveCountMismatch {
            expected: config.num_perspectives,
            got: sample.num_perspectives(),
        });
    }
    if sample.feature_dim() != config.input_dim {
        return Err(Error::FeatureDimMismatch {
            perspective: 0,
            instance: 0,
            expected: config.input_dim,
            got: sample.feature_dim(),
        });
    }

    let views = fuse_sample(config.fusion_mode, sample);
    let kind = config.cell_kind.effective();
    let (fwd_steps, fwd_hs) = run_direction(kind, &params.fwd, &views, false);
    let (bwd_steps, bwd_hs) = match &params.bwd {
        Some(bwd) => {
            let (steps, hs) = run_direction(kind, bwd, &views, true);
            (Some(steps), Some(hs))
        }
        None => (None, None),
    };

    let n = fwd_hs.len();
    let hs: Vec<Vec<f64>> = match &bwd_hs {
        Some(bwd_hs) => (0..n)
            .map(|i| {
                let mut v = fwd_hs[i].clone();
                v.extend_from_slice(&bwd_hs[n - 1 - i]);
                v
            })
            .collect(),
        None => fwd_hs,
    };

    let (dropout_mask, pooled_inputs) = match dropout_rng {
        Some(rng) if config.dropout_rate > 0.0 => {
            let keep_scale = 1.0 / (1.0 - config.dropout_rate);
            let mask: Vec<Vec<f64>> = hs
                .iter()
                .map(|h| {
                    h.iter()
                        .map(|_| {
                            if rng.uniform() < config.dropout_rate {
                                0.0
                            } else {
                                keep_scale
                            }
                        })
                        .collect()
                })
                .collect();
            let pooled = hs
                .iter()
                .zip(&mask)
                .map(|(h, m)| math::hadamard(h, m))
                .collect();
            (Some(mask), pooled)
        }
        _ => (None, hs.clone()),
    };

    let (attn, attn_weights, context) = if config.attention {
        let (context, weights) = attention_pool(&params.head, &pooled_inputs);
        let tanh_scores: Vec<Vec<f64>> = pooled_inputs
            .iter()
            .map(|h| math::tanh_act(&math::affine(&params.head.attn_w, h, &params.head.attn_b)))
            .collect();
        let scores: Vec<f64> = tanh_scores
            .iter()
            .map(|t| t.iter().zip(&params.head.attn_v).map(|(&a, &b)| a * b).sum())
            .collect();
        (Some(AttnTrace { tanh_scores, scores }), weights, context)
    } else {
        let n_eff = pooled_inputs.len();
        let weights = vec![1.0 / n_eff as f64; n_eff];
        let context = weighted_sum(&pooled_inputs, &weights);
        (None, weights, context)
    };

    let (logits, probs) = classify(&params.head, &context);

    Ok(ForwardTrace {
        fwd_steps,
        bwd_steps,
        hs,
        dropout_mask,
        pooled_inputs,
        attn,
        attn_weights,
        context,
        logits,
        probs,
    })
}

/// Late fusion: average of the per-perspective class distributions,
/// each produced by its own single-view network.
pub fn score_fusion_predict(
    models: &[ModelParams],
    config: &NetworkConfig,
    sample: &SequenceSample,
) -> Result<Vec<f64>, Error> {
    sample.validate()?;
    if models.len() != sample.num_perspectives() {
        return Err(Error::PerspectiveCountMismatch {
            expected: sample.num_perspectives(),
            got: models.len(),
        });
    }
    let sub = config.score_submodel();
    let mut avg = vec![0.0; config.num_classes];
    for (p, model) in models.iter().enumerate() {
        let view = sample.extract_view(p);
        let trace = forward_sample(model, &sub, &view, None)?;
        math::add_assign(&mut avg, &trace.probs);
    }
    let inv = 1.0 / models.len() as f64;
    for v in &mut avg {
        *v *= inv;
    }
    Ok(avg)
}
