//! Multi-perspective LSTM cell step, the vanilla peephole baseline, and
//! the three ablation variants.
//!
//! One step consumes the current instance of every perspective plus the
//! previous `(H, C)` pair. Gates and candidates are computed for every
//! perspective first (all reading the previous cell state), then the
//! cell state is folded perspective by perspective:
//!
//! ```text
//! c_1 = F_1 ⊙ C_prev + I_1 ⊙ G_1
//! c_p = F_p ⊙ c_{p-1} + I_p ⊙ G_p        p = 2..m
//! C   = c_m
//! h_p = O_p ⊙ tanh(C)
//! H   = Σ_p h_p
//! ```
//!
//! The chained `c_p` update is what couples the perspectives: by the
//! time perspective `p` writes its contribution, it gates the state
//! already folded over perspectives `1..p-1`. All peepholes (`W_c`
//! terms in the gates) read `C_prev`, including the output gate.

use crate::math::{self, Mat, RngState};

/// Weights and bias for one gate of one perspective.
///
/// `w_s` multiplies the current instance, `w_h` the previous hidden
/// state, `w_c` the previous cell state (a full matrix, not a diagonal
/// peephole), and `b` is the bias.
#[derive(Debug, Clone, PartialEq)]
pub struct GateParams {
    pub w_s: Mat,
    pub w_h: Mat,
    pub w_c: Mat,
    pub b: Vec<f64>,
}

impl GateParams {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        GateParams {
            w_s: Mat::zeros(hidden_dim, input_dim),
            w_h: Mat::zeros(hidden_dim, hidden_dim),
            w_c: Mat::zeros(hidden_dim, hidden_dim),
            b: vec![0.0; hidden_dim],
        }
    }

    pub fn glorot(rng: &mut RngState, input_dim: usize, hidden_dim: usize) -> Self {
        GateParams {
            w_s: math::init_glorot(rng, hidden_dim, input_dim),
            w_h: math::init_glorot(rng, hidden_dim, hidden_dim),
            w_c: math::init_glorot(rng, hidden_dim, hidden_dim),
            b: vec![0.0; hidden_dim],
        }
    }

    fn pre_activation(&self, input: &[f64], prev_h: &[f64], peek_c: &[f64]) -> Vec<f64> {
        let mut z = math::affine(&self.w_s, input, &self.b);
        math::affine_into(&mut z, &self.w_h, prev_h);
        math::affine_into(&mut z, &self.w_c, peek_c);
        z
    }
}

/// Per-perspective gate set: input, forget, output, candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct PerspectiveParams {
    pub input: GateParams,
    pub forget: GateParams,
    pub output: GateParams,
    pub candidate: GateParams,
}

impl PerspectiveParams {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        PerspectiveParams {
            input: GateParams::zeros(input_dim, hidden_dim),
            forget: GateParams::zeros(input_dim, hidden_dim),
            output: GateParams::zeros(input_dim, hidden_dim),
            candidate: GateParams::zeros(input_dim, hidden_dim),
        }
    }

    pub fn glorot(rng: &mut RngState, input_dim: usize, hidden_dim: usize) -> Self {
        PerspectiveParams {
            input: GateParams::glorot(rng, input_dim, hidden_dim),
            forget: GateParams::glorot(rng, input_dim, hidden_dim),
            output: GateParams::glorot(rng, input_dim, hidden_dim),
            candidate: GateParams::glorot(rng, input_dim, hidden_dim),
        }
    }
}

/// Full parameter family of one cell: one gate set per perspective.
#[derive(Debug, Clone, PartialEq)]
pub struct MpCellParams {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub perspectives: Vec<PerspectiveParams>,
}

impl MpCellParams {
    pub fn zeros(num_perspectives: usize, input_dim: usize, hidden_dim: usize) -> Self {
        MpCellParams {
            input_dim,
            hidden_dim,
            perspectives: (0..num_perspectives)
                .map(|_| PerspectiveParams::zeros(input_dim, hidden_dim))
                .collect(),
        }
    }

    pub fn glorot(
        rng: &mut RngState,
        num_perspectives: usize,
        input_dim: usize,
        hidden_dim: usize,
    ) -> Self {
        MpCellParams {
            input_dim,
            hidden_dim,
            perspectives: (0..num_perspectives)
                .map(|_| PerspectiveParams::glorot(rng, input_dim, hidden_dim))
                .collect(),
        }
    }

    pub fn num_perspectives(&self) -> usize {
        self.perspectives.len()
    }
}

/// The `(H, C)` pair carried between cells.
#[derive(Debug, Clone, PartialEq)]
pub struct StepState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl StepState {
    pub fn zeros(hidden_dim: usize) -> Self {
        StepState {
            h: vec![0.0; hidden_dim],
            c: vec![0.0; hidden_dim],
        }
    }
}

/// Cell variants for the ablation study.
///
/// `ModelA` drops the `F_1 ⊙ C_prev` term from the first fold,
/// `ModelB` chains each perspective to its own previous-instance state
/// instead of the previous perspective, `ModelC` zeroes `C_prev`
/// everywhere it appears (gates and first fold), and `Full` is the
/// unmodified cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AblationKind {
    ModelA,
    ModelB,
    ModelC,
    Full,
}

/// Everything the step computed, retained for backpropagation.
///
/// Gate entries lie in (0,1); candidates and per-perspective hiddens in
/// (-1,1). `cell_parts[p]` is the intermediate state after folding
/// perspective `p`; the last part equals the new joint state.
#[derive(Debug, Clone, PartialEq)]
pub struct StepTrace {
    pub inputs: Vec<Vec<f64>>,
    pub prev_h: Vec<f64>,
    pub prev_c: Vec<f64>,
    /// What the gate peepholes actually multiplied: `prev_c`, except
    /// zeros for `ModelC`.
    pub peek_c: Vec<f64>,
    /// Previous-instance per-perspective states (`ModelB` only).
    pub prev_parts: Option<Vec<Vec<f64>>>,
    pub gate_i: Vec<Vec<f64>>,
    pub gate_f: Vec<Vec<f64>>,
    pub gate_o: Vec<Vec<f64>>,
    pub candidate: Vec<Vec<f64>>,
    pub cell_parts: Vec<Vec<f64>>,
    pub per_hidden: Vec<Vec<f64>>,
    pub tanh_c: Vec<f64>,
}

fn check_step_args(params: &MpCellParams, inputs: &[Vec<f64>], prev: &StepState) {
    let m = params.num_perspectives();
    assert!(m >= 1, "cell step: zero perspectives");
    assert_eq!(
        inputs.len(),
        m,
        "cell step: got {} input vectors for {} perspectives",
        inputs.len(),
        m
    );
    for (p, input) in inputs.iter().enumerate() {
        assert_eq!(
            input.len(),
            params.input_dim,
            "cell step: perspective {p} input has dim {}, params expect {}",
            input.len(),
            params.input_dim
        );
    }
    assert_eq!(
        prev.h.len(),
        params.hidden_dim,
        "cell step: prev hidden dim {} vs params {}",
        prev.h.len(),
        params.hidden_dim
    );
    assert_eq!(
        prev.c.len(),
        params.hidden_dim,
        "cell step: prev cell dim {} vs params {}",
        prev.c.len(),
        params.hidden_dim
    );
}

/// One multi-perspective step (the `Full` cell).
pub fn mp_cell_step(
    params: &MpCellParams,
    inputs: &[Vec<f64>],
    prev: &StepState,
) -> (StepState, StepTrace) {
    ablation_cell_step(AblationKind::Full, params, inputs, prev, None)
}

/// Vanilla peephole LSTM step: exactly the multi-perspective step with
/// a single perspective (the output gate peeks at the previous cell
/// state, matching the multi-perspective wiring, so the reduction is
/// bit-exact).
pub fn vanilla_cell_step(
    params: &MpCellParams,
    input: &[f64],
    prev: &StepState,
) -> (StepState, StepTrace) {
    assert_eq!(
        params.num_perspectives(),
        1,
        "vanilla_cell_step: params carry {} perspectives, expected 1",
        params.num_perspectives()
    );
    mp_cell_step(params, std::slice::from_ref(&input.to_vec()), prev)
}

/// Ablation-aware step. `prev_parts` carries the previous instance's
/// per-perspective states and is required (and only read) for `ModelB`.
pub fn ablation_cell_step(
    kind: AblationKind,
    params: &MpCellParams,
    inputs: &[Vec<f64>],
    prev: &StepState,
    prev_parts: Option<&[Vec<f64>]>,
) -> (StepState, StepTrace) {
    check_step_args(params, inputs, prev);
    let m = params.num_perspectives();
    let hidden = params.hidden_dim;

    let prev_parts = match kind {
        AblationKind::ModelB => {
            let parts =
                prev_parts.expect("ablation_cell_step: ModelB requires prev_parts, got None");
            assert_eq!(
                parts.len(),
                m,
                "ablation_cell_step: prev_parts has {} states for {} perspectives",
                parts.len(),
                m
            );
            for (p, part) in parts.iter().enumerate() {
                assert_eq!(
                    part.len(),
                    hidden,
                    "ablation_cell_step: prev_parts[{p}] dim {} vs hidden {}",
                    part.len(),
                    hidden
                );
            }
            Some(parts)
        }
        _ => None,
    };

    let zeros = vec![0.0; hidden];
    let peek_c: &[f64] = match kind {
        AblationKind::ModelC => &zeros,
        _ => &prev.c,
    };

    // All gates for all perspectives first, then the state chain, so
    // traces are reproducible regardless of caller.
    let mut gate_i = Vec::with_capacity(m);
    let mut gate_f = Vec::with_capacity(m);
    let mut gate_o = Vec::with_capacity(m);
    let mut candidate = Vec::with_capacity(m);
    for (p, input) in inputs.iter().enumerate() {
        let pp = &params.perspectives[p];
        gate_i.push(math::sigmoid(&pp.input.pre_activation(input, &prev.h, peek_c)));
        candidate.push(math::tanh_act(
            &pp.candidate.pre_activation(input, &prev.h, peek_c),
        ));
        gate_f.push(math::sigmoid(&pp.forget.pre_activation(input, &prev.h, peek_c)));
        gate_o.push(math::sigmoid(&pp.output.pre_activation(input, &prev.h, peek_c)));
    }

    let mut cell_parts: Vec<Vec<f64>> = Vec::with_capacity(m);
    for p in 0..m {
        let mut part = math::hadamard(&gate_i[p], &candidate[p]);
        let carried: Option<&[f64]> = if p == 0 {
            match kind {
                AblationKind::Full | AblationKind::ModelB => Some(&prev.c),
                AblationKind::ModelA | AblationKind::ModelC => None,
            }
        } else {
            match kind {
                AblationKind::ModelB => Some(&prev_parts.unwrap()[p]),
                _ => Some(&cell_parts[p - 1]),
            }
        };
        if let Some(carried) = carried {
            math::add_hadamard(&mut part, &gate_f[p], carried);
        }
        cell_parts.push(part);
    }

    let new_c = cell_parts[m - 1].clone();
    let tanh_c = math::tanh_act(&new_c);

    let mut per_hidden = Vec::with_capacity(m);
    let mut new_h = vec![0.0; hidden];
    for o in &gate_o {
        let hp = math::hadamard(o, &tanh_c);
        math::add_assign(&mut new_h, &hp);
        per_hidden.push(hp);
    }

    let trace = StepTrace {
        inputs: inputs.to_vec(),
        prev_h: prev.h.clone(),
        prev_c: prev.c.clone(),
        peek_c: peek_c.to_vec(),
        prev_parts: prev_parts.map(|p| p.to_vec()),
        gate_i,
        gate_f,
        gate_o,
        candidate,
        cell_parts,
        per_hidden,
        tanh_c,
    };
    (StepState { h: new_h, c: new_c }, trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Scalar all-ones cell used by the hand oracles: every weight 1,
    /// every bias 0, hidden = input = 1.
    fn scalar_ones(m: usize) -> MpCellParams {
        let mut params = MpCellParams::zeros(m, 1, 1);
        for pp in &mut params.perspectives {
            for gate in [&mut pp.input, &mut pp.forget, &mut pp.output, &mut pp.candidate] {
                gate.w_s.data_mut()[0] = 1.0;
                gate.w_h.data_mut()[0] = 1.0;
                gate.w_c.data_mut()[0] = 1.0;
            }
        }
        params
    }

    fn random_params(rng: &mut RngState, m: usize, d: usize, h: usize) -> MpCellParams {
        MpCellParams::glorot(rng, m, d, h)
    }

    fn random_vec(rng: &mut RngState, len: usize) -> Vec<f64> {
        (0..len).map(|_| rng.uniform() * 4.0 - 2.0).collect()
    }

    /// Literal scalar transcription of the cell equations, independent
    /// of the implementation: the oracle the derived values come from.
    fn scalar_oracle(
        inputs: &[f64],
        prev_h: f64,
        prev_c: f64,
        drop_first_carry: bool,
    ) -> (f64, f64) {
        let sig = |x: f64| 1.0 / (1.0 + (-x).exp());
        let m = inputs.len();
        let mut c = 0.0;
        let mut o_sum = 0.0;
        for (p, &s) in inputs.iter().enumerate() {
            let z = s + prev_h + prev_c;
            let (i, g, f, o) = (sig(z), z.tanh(), sig(z), sig(z));
            o_sum += o;
            let carried = if p == 0 {
                if drop_first_carry {
                    0.0
                } else {
                    prev_c
                }
            } else {
                c
            };
            c = f * carried + i * g;
        }
        let _ = m;
        (o_sum * c.tanh(), c)
    }

    #[test]
    fn zero_params_give_zero_state() {
        let params = MpCellParams::zeros(2, 3, 4);
        let inputs = vec![vec![1.0, -2.0, 0.5], vec![0.1, 0.2, 0.3]];
        let (state, trace) = mp_cell_step(&params, &inputs, &StepState::zeros(4));
        assert!(state.h.iter().all(|&v| v == 0.0));
        assert!(state.c.iter().all(|&v| v == 0.0));
        for p in 0..2 {
            assert!(trace.gate_i[p].iter().all(|&v| v == 0.5));
            assert!(trace.gate_f[p].iter().all(|&v| v == 0.5));
            assert!(trace.candidate[p].iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn scalar_two_perspective_oracle() {
        let params = scalar_ones(2);
        let inputs = vec![vec![1.0], vec![-1.0]];
        let (state, trace) = mp_cell_step(&params, &inputs, &StepState::zeros(1));
        let (h, c) = scalar_oracle(&[1.0, -1.0], 0.0, 0.0, false);
        assert!((state.c[0] - c).abs() < 1e-15);
        assert!((state.h[0] - h).abs() < 1e-15);
        // frozen from the independent evaluation
        assert!((state.c[0] - -0.055_085_715_461_947_6).abs() < 1e-12);
        assert!((state.h[0] - -0.055_030_064_981_193_276).abs() < 1e-12);
        // sigma(1) + sigma(-1) = 1, so H = tanh(C) here
        assert!((state.h[0] - state.c[0].tanh()).abs() < 1e-15);
        assert!((trace.cell_parts[0][0] - 0.556_769_941_145_939_7).abs() < 1e-12);
    }

    #[test]
    fn vanilla_scalar_oracle() {
        let params = scalar_ones(1);
        let (state, trace) = vanilla_cell_step(&params, &[1.0], &StepState::zeros(1));
        assert!((state.c[0] - 0.556_769_941_145_939_7).abs() < 1e-12);
        assert!((trace.gate_o[0][0] - 0.731_058_578_630_004_9).abs() < 1e-12);
        assert!((state.h[0] - 0.369_606_352_935_705_76).abs() < 1e-12);
    }

    #[test]
    fn single_perspective_reduces_to_vanilla() {
        let mut rng = RngState::new(2024);
        for _ in 0..100 {
            let d = 1 + rng.below(4) as usize;
            let h = 1 + rng.below(5) as usize;
            let params = random_params(&mut rng, 1, d, h);
            let input = random_vec(&mut rng, d);
            let prev = StepState {
                h: random_vec(&mut rng, h),
                c: random_vec(&mut rng, h),
            };
            let (a, _) = mp_cell_step(&params, std::slice::from_ref(&input), &prev);
            let (b, _) = vanilla_cell_step(&params, &input, &prev);
            assert_eq!(a, b, "m = 1 reduction must be bit-exact");
        }
    }

    #[test]
    fn ablation_full_matches_mp_bitwise() {
        let mut rng = RngState::new(555);
        for _ in 0..50 {
            let m = 1 + rng.below(3) as usize;
            let params = random_params(&mut rng, m, 2, 3);
            let inputs: Vec<Vec<f64>> = (0..m).map(|_| random_vec(&mut rng, 2)).collect();
            let prev = StepState {
                h: random_vec(&mut rng, 3),
                c: random_vec(&mut rng, 3),
            };
            let (a, ta) = mp_cell_step(&params, &inputs, &prev);
            let (b, tb) = ablation_cell_step(AblationKind::Full, &params, &inputs, &prev, None);
            assert_eq!(a, b);
            assert_eq!(ta, tb);
        }
    }

    #[test]
    fn model_c_with_zero_weights_matches_zero_state() {
        let mut rng = RngState::new(31);
        let params = MpCellParams::zeros(2, 2, 3);
        let inputs = vec![random_vec(&mut rng, 2), random_vec(&mut rng, 2)];
        let prev = StepState {
            h: vec![0.0; 3],
            c: random_vec(&mut rng, 3),
        };
        let (a, _) = ablation_cell_step(AblationKind::ModelC, &params, &inputs, &prev, None);
        let (b, _) = mp_cell_step(&params, &inputs, &StepState::zeros(3));
        assert_eq!(a.h, b.h);
        assert_eq!(a.c, b.c);
    }

    #[test]
    fn model_a_scalar_oracle() {
        // same configuration as the two-perspective oracle, but the
        // previous cell state is 5 and the first fold drops its carry
        let params = scalar_ones(2);
        let inputs = vec![vec![1.0], vec![-1.0]];
        let prev = StepState {
            h: vec![0.0],
            c: vec![5.0],
        };
        let (state, trace) =
            ablation_cell_step(AblationKind::ModelA, &params, &inputs, &prev, None);
        let (h, c) = scalar_oracle(&[1.0, -1.0], 0.0, 5.0, true);
        assert!((state.c[0] - c).abs() < 1e-15);
        assert!((state.h[0] - h).abs() < 1e-15);
        // frozen from the independent evaluation
        assert!((trace.cell_parts[0][0] - 0.997_515_118_878_617_8).abs() < 1e-12);
        assert!((state.c[0] - 1.960_928_755_642_796_6).abs() < 1e-12);
        assert!((state.h[0] - 1.902_657_050_077_466_2).abs() < 1e-12);
    }

    #[test]
    fn model_b_uses_per_perspective_carry() {
        let mut rng = RngState::new(99);
        let params = random_params(&mut rng, 3, 2, 2);
        let inputs: Vec<Vec<f64>> = (0..3).map(|_| random_vec(&mut rng, 2)).collect();
        let parts: Vec<Vec<f64>> = (0..3).map(|_| random_vec(&mut rng, 2)).collect();
        let prev = StepState {
            h: random_vec(&mut rng, 2),
            c: parts[2].clone(), // joint state is the last part
        };
        let (_, trace) =
            ablation_cell_step(AblationKind::ModelB, &params, &inputs, &prev, Some(&parts));
        // c_p = F_p ⊙ parts[p] + I_p ⊙ G_p for p >= 1
        for (p, part) in parts.iter().enumerate().skip(1) {
            for (j, &carry) in part.iter().enumerate() {
                let expect = trace.gate_f[p][j] * carry + trace.gate_i[p][j] * trace.candidate[p][j];
                assert!((trace.cell_parts[p][j] - expect).abs() < 1e-15);
            }
        }
        // first fold unchanged: carries the joint prev.c
        for (j, &carry) in prev.c.iter().enumerate() {
            let expect = trace.gate_f[0][j] * carry + trace.gate_i[0][j] * trace.candidate[0][j];
            assert!((trace.cell_parts[0][j] - expect).abs() < 1e-15);
        }
    }

    #[test]
    #[should_panic(expected = "ModelB requires prev_parts")]
    fn model_b_without_parts_is_a_contract_error() {
        let params = MpCellParams::zeros(2, 1, 1);
        let inputs = vec![vec![0.0], vec![0.0]];
        ablation_cell_step(AblationKind::ModelB, &params, &inputs, &StepState::zeros(1), None);
    }

    #[test]
    #[should_panic(expected = "got 1 input vectors for 2 perspectives")]
    fn wrong_perspective_count_panics() {
        let params = MpCellParams::zeros(2, 1, 1);
        mp_cell_step(&params, &[vec![0.0]], &StepState::zeros(1));
    }

    #[test]
    #[should_panic(expected = "input has dim 3, params expect 2")]
    fn wrong_input_dim_panics() {
        let params = MpCellParams::zeros(1, 2, 1);
        mp_cell_step(&params, &[vec![0.0; 3]], &StepState::zeros(1));
    }

    #[test]
    fn ranges_hold_for_random_steps() {
        let mut rng = RngState::new(7777);
        for trial in 0..2000 {
            let m = 1 + rng.below(3) as usize;
            let d = 1 + rng.below(3) as usize;
            let h = 1 + rng.below(4) as usize;
            let mut params = random_params(&mut rng, m, d, h);
            // occasionally blow the weights up to force saturation
            if trial % 7 == 0 {
                for pp in &mut params.perspectives {
                    for g in [&mut pp.input, &mut pp.forget, &mut pp.output, &mut pp.candidate] {
                        for v in g.w_s.data_mut() {
                            *v *= 300.0;
                        }
                    }
                }
            }
            let inputs: Vec<Vec<f64>> = (0..m).map(|_| random_vec(&mut rng, d)).collect();
            let prev = StepState {
                h: random_vec(&mut rng, h),
                c: random_vec(&mut rng, h),
            };
            let (state, trace) = mp_cell_step(&params, &inputs, &prev);
            for p in 0..m {
                assert!(trace.gate_i[p].iter().all(|&v| v > 0.0 && v < 1.0));
                assert!(trace.gate_f[p].iter().all(|&v| v > 0.0 && v < 1.0));
                assert!(trace.gate_o[p].iter().all(|&v| v > 0.0 && v < 1.0));
                assert!(trace.candidate[p].iter().all(|&v| v > -1.0 && v < 1.0));
                assert!(trace.per_hidden[p].iter().all(|&v| v > -1.0 && v < 1.0));
            }
            let bound = m as f64;
            assert!(state.h.iter().all(|&v| v.abs() < bound));
            assert!(state.c.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn perspective_order_matters() {
        let mut rng = RngState::new(404);
        let mut differing = 0;
        for _ in 0..100 {
            let params = random_params(&mut rng, 2, 2, 3);
            let inputs = vec![random_vec(&mut rng, 2), random_vec(&mut rng, 2)];
            let prev = StepState {
                h: random_vec(&mut rng, 3),
                c: random_vec(&mut rng, 3),
            };
            let (fwd, _) = mp_cell_step(&params, &inputs, &prev);
            let swapped_params = MpCellParams {
                input_dim: params.input_dim,
                hidden_dim: params.hidden_dim,
                perspectives: vec![
                    params.perspectives[1].clone(),
                    params.perspectives[0].clone(),
                ],
            };
            let swapped_inputs = vec![inputs[1].clone(), inputs[0].clone()];
            let (rev, _) = mp_cell_step(&swapped_params, &swapped_inputs, &prev);
            let diff: f64 = fwd
                .h
                .iter()
                .zip(&rev.h)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if diff > 1e-9 {
                differing += 1;
            }
        }
        assert!(differing >= 99, "only {differing}/100 trials differed");
    }

    #[test]
    fn first_perspective_reaches_final_state_through_chain() {
        // m = 3: perturbing S^1 must move C = c_3 (finite difference)
        let mut rng = RngState::new(606);
        let params = random_params(&mut rng, 3, 2, 2);
        let prev = StepState {
            h: random_vec(&mut rng, 2),
            c: random_vec(&mut rng, 2),
        };
        let base: Vec<Vec<f64>> = (0..3).map(|_| random_vec(&mut rng, 2)).collect();
        let eps = 1e-6;
        let mut plus = base.clone();
        plus[0][0] += eps;
        let mut minus = base.clone();
        minus[0][0] -= eps;
        let (sp, _) = mp_cell_step(&params, &plus, &prev);
        let (sm, _) = mp_cell_step(&params, &minus, &prev);
        let grad: f64 = sp
            .c
            .iter()
            .zip(&sm.c)
            .map(|(a, b)| ((a - b) / (2.0 * eps)).abs())
            .sum();
        assert!(grad > 1e-9, "C is insensitive to the first perspective: {grad}");
    }

    #[test]
    fn steps_are_deterministic() {
        let mut rng = RngState::new(8);
        let params = random_params(&mut rng, 2, 2, 2);
        let inputs = vec![random_vec(&mut rng, 2), random_vec(&mut rng, 2)];
        let prev = StepState {
            h: random_vec(&mut rng, 2),
            c: random_vec(&mut rng, 2),
        };
        let (a, ta) = mp_cell_step(&params, &inputs, &prev);
        let (b, tb) = mp_cell_step(&params, &inputs, &prev);
        assert_eq!(a, b);
        assert_eq!(ta, tb);
    }
}
