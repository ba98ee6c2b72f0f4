//! LSTM cell: forward step, cached activations, and the exact reverse-mode
//! step used by the truncated BPTT sweeps.

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::scalar::{sigmoid, Scalar};
use crate::tensor::TensorBuffer;

/// Gate order used everywhere in this crate.
pub const GATE_INPUT: usize = 0;
pub const GATE_FORGET: usize = 1;
pub const GATE_CANDIDATE: usize = 2;
pub const GATE_OUTPUT: usize = 3;

pub const GATE_NAMES: [&str; 4] = ["i", "f", "g", "o"];

/// Weights of one LSTM layer. Input weights are (hidden x input_dim),
/// recurrent weights (hidden x hidden), biases (1 x hidden).
///
/// `forget_bias_offset` is a fixed constant added to the forget-gate
/// pre-activation; it is not a trained parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams<T> {
    pub w_input: [TensorBuffer<T>; 4],
    pub w_recurrent: [TensorBuffer<T>; 4],
    pub bias: [TensorBuffer<T>; 4],
    pub forget_bias_offset: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmState<T> {
    pub hidden: TensorBuffer<T>,
    pub cell: TensorBuffer<T>,
}

impl<T: Scalar> LstmState<T> {
    pub fn zeros(hidden_dim: usize) -> Self {
        LstmState {
            hidden: TensorBuffer::zeros(1, hidden_dim),
            cell: TensorBuffer::zeros(1, hidden_dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.hidden.cols()
    }
}

/// Everything the backward step needs about one forward step.
#[derive(Debug, Clone)]
pub struct StepCache<T> {
    pub input: TensorBuffer<T>,
    pub h_prev: TensorBuffer<T>,
    pub c_prev: TensorBuffer<T>,
    /// Post-activation gate values, in [`GATE_NAMES`] order.
    pub gates: [TensorBuffer<T>; 4],
    pub tanh_cell: TensorBuffer<T>,
    pub hidden: TensorBuffer<T>,
    pub cell: TensorBuffer<T>,
}

/// Gradients mirroring [`LstmParams`].
#[derive(Debug, Clone)]
pub struct LstmGrads<T> {
    pub w_input: [TensorBuffer<T>; 4],
    pub w_recurrent: [TensorBuffer<T>; 4],
    pub bias: [TensorBuffer<T>; 4],
}

impl<T: Scalar> LstmParams<T> {
    /// Weights drawn uniformly from [-scale, scale]; biases zero.
    pub fn init(input_dim: usize, hidden_dim: usize, scale: f64, rng: &mut RngStream) -> Self {
        let mut mat = |rows: usize, cols: usize| {
            TensorBuffer::new(
                rows,
                cols,
                (0..rows * cols)
                    .map(|_| T::from_f64(rng.uniform(-scale, scale)))
                    .collect(),
            )
        };
        LstmParams {
            w_input: std::array::from_fn(|_| mat(hidden_dim, input_dim)),
            w_recurrent: std::array::from_fn(|_| mat(hidden_dim, hidden_dim)),
            bias: std::array::from_fn(|_| TensorBuffer::zeros(1, hidden_dim)),
            forget_bias_offset: T::one(),
        }
    }

    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        LstmParams {
            w_input: std::array::from_fn(|_| TensorBuffer::zeros(hidden_dim, input_dim)),
            w_recurrent: std::array::from_fn(|_| TensorBuffer::zeros(hidden_dim, hidden_dim)),
            bias: std::array::from_fn(|_| TensorBuffer::zeros(1, hidden_dim)),
            forget_bias_offset: T::zero(),
        }
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_input[0].rows()
    }

    pub fn input_dim(&self) -> usize {
        self.w_input[0].cols()
    }

    pub fn zero_grads(&self) -> LstmGrads<T> {
        LstmGrads {
            w_input: std::array::from_fn(|g| self.w_input[g].zeros_like()),
            w_recurrent: std::array::from_fn(|g| self.w_recurrent[g].zeros_like()),
            bias: std::array::from_fn(|g| self.bias[g].zeros_like()),
        }
    }
}

/// One LSTM update:
/// i,f,o = sigmoid(W x + U h + b), g = tanh(W x + U h + b),
/// c' = f*c + i*g (forget pre-activation shifted by `forget_bias_offset`),
/// h' = o * tanh(c').
pub fn lstm_step<T: Scalar>(
    params: &LstmParams<T>,
    state: &LstmState<T>,
    embedded_input: &TensorBuffer<T>,
) -> Result<(LstmState<T>, StepCache<T>)> {
    let hidden_dim = params.hidden_dim();
    if embedded_input.rows() != 1 || embedded_input.cols() != params.input_dim() {
        return Err(Error::dim(
            "lstm_step input",
            embedded_input.shape(),
            (1, params.input_dim()),
        ));
    }
    if state.dim() != hidden_dim {
        return Err(Error::dim(
            "lstm_step state",
            state.hidden.shape(),
            (1, hidden_dim),
        ));
    }

    let mut gates: [TensorBuffer<T>; 4] =
        std::array::from_fn(|_| TensorBuffer::zeros(1, hidden_dim));
    for g in 0..4 {
        let mut z = params.w_input[g].matvec(embedded_input)?;
        let rec = params.w_recurrent[g].matvec(&state.hidden)?;
        z.add_scaled(&rec, T::one());
        z.add_scaled(&params.bias[g], T::one());
        if g == GATE_FORGET {
            let off = params.forget_bias_offset;
            for v in z.data_mut() {
                *v += off;
            }
        }
        if g == GATE_CANDIDATE {
            for v in z.data_mut() {
                *v = v.tanh();
            }
        } else {
            for v in z.data_mut() {
                *v = sigmoid(*v);
            }
        }
        gates[g] = z;
    }

    let mut cell = TensorBuffer::zeros(1, hidden_dim);
    for k in 0..hidden_dim {
        let c = gates[GATE_FORGET].data()[k] * state.cell.data()[k]
            + gates[GATE_INPUT].data()[k] * gates[GATE_CANDIDATE].data()[k];
        cell.data_mut()[k] = c;
    }
    let tanh_cell = cell.map(|v| v.tanh());
    let mut hidden = TensorBuffer::zeros(1, hidden_dim);
    for k in 0..hidden_dim {
        hidden.data_mut()[k] = gates[GATE_OUTPUT].data()[k] * tanh_cell.data()[k];
    }

    let next = LstmState {
        hidden: hidden.clone(),
        cell: cell.clone(),
    };
    let cache = StepCache {
        input: embedded_input.clone(),
        h_prev: state.hidden.clone(),
        c_prev: state.cell.clone(),
        gates,
        tanh_cell,
        hidden,
        cell,
    };
    Ok((next, cache))
}

/// Reverse-mode step. Takes the cotangents of this step's outputs
/// (d hidden, d cell) and returns the cotangents of the previous state and
/// of the embedded input, accumulating parameter gradients into `grads`.
pub fn lstm_step_backward<T: Scalar>(
    params: &LstmParams<T>,
    cache: &StepCache<T>,
    d_hidden: &TensorBuffer<T>,
    d_cell_in: &TensorBuffer<T>,
    grads: &mut LstmGrads<T>,
) -> (TensorBuffer<T>, TensorBuffer<T>, TensorBuffer<T>) {
    let hidden_dim = params.hidden_dim();
    let one = T::one();

    let i = &cache.gates[GATE_INPUT];
    let f = &cache.gates[GATE_FORGET];
    let g = &cache.gates[GATE_CANDIDATE];
    let o = &cache.gates[GATE_OUTPUT];

    // dc = dc_in + dh * o * (1 - tanh(c)^2)
    let mut d_cell = d_cell_in.clone();
    for k in 0..hidden_dim {
        let th = cache.tanh_cell.data()[k];
        d_cell.data_mut()[k] += d_hidden.data()[k] * o.data()[k] * (one - th * th);
    }

    // Pre-activation gate gradients.
    let mut dz: [TensorBuffer<T>; 4] = std::array::from_fn(|_| TensorBuffer::zeros(1, hidden_dim));
    for k in 0..hidden_dim {
        let dzo = d_hidden.data()[k] * cache.tanh_cell.data()[k];
        dz[GATE_OUTPUT].data_mut()[k] = dzo * o.data()[k] * (one - o.data()[k]);

        let dc = d_cell.data()[k];
        let dzf = dc * cache.c_prev.data()[k];
        dz[GATE_FORGET].data_mut()[k] = dzf * f.data()[k] * (one - f.data()[k]);

        let dzi = dc * g.data()[k];
        dz[GATE_INPUT].data_mut()[k] = dzi * i.data()[k] * (one - i.data()[k]);

        let dzg = dc * i.data()[k];
        dz[GATE_CANDIDATE].data_mut()[k] = dzg * (one - g.data()[k] * g.data()[k]);
    }

    let mut d_input = TensorBuffer::zeros(1, params.input_dim());
    let mut d_h_prev = TensorBuffer::zeros(1, hidden_dim);
    for gate in 0..4 {
        grads.w_input[gate].add_outer_scaled(&dz[gate], &cache.input, one);
        grads.w_recurrent[gate].add_outer_scaled(&dz[gate], &cache.h_prev, one);
        grads.bias[gate].add_scaled(&dz[gate], one);
        let dx = params.w_input[gate].matvec_transposed(&dz[gate]).unwrap();
        d_input.add_scaled(&dx, one);
        let dh = params.w_recurrent[gate]
            .matvec_transposed(&dz[gate])
            .unwrap();
        d_h_prev.add_scaled(&dh, one);
    }

    let mut d_c_prev = TensorBuffer::zeros(1, hidden_dim);
    for k in 0..hidden_dim {
        d_c_prev.data_mut()[k] = d_cell.data()[k] * f.data()[k];
    }

    (d_h_prev, d_c_prev, d_input)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradcheck::{finite_difference_gradient, max_relative_error};

    type Tb = TensorBuffer<f64>;

    #[test]
    fn zero_params_give_zero_hidden() {
        let params = LstmParams::<f64>::zeros(3, 4);
        let state = LstmState::zeros(4);
        let (next, cache) = lstm_step(&params, &state, &Tb::vector(vec![0.5, -1.0, 2.0])).unwrap();
        assert!(next.hidden.data().iter().all(|&v| v == 0.0));
        // o = sigmoid(0) = 0.5, tanh(cell') = tanh(0) = 0
        assert!(cache.gates[GATE_OUTPUT].data().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn saturated_gates_preserve_cell_exactly() {
        let mut params = LstmParams::<f64>::zeros(2, 3);
        params.forget_bias_offset = 50.0;
        params.bias[GATE_INPUT].fill(-50.0);
        let state = LstmState {
            hidden: Tb::zeros(1, 3),
            cell: Tb::vector(vec![0.7, -1.3, 2.0]),
        };
        let (next, _) = lstm_step(&params, &state, &Tb::vector(vec![1.0, -1.0])).unwrap();
        assert_eq!(next.cell.data(), state.cell.data());
    }

    // A second, straight-line implementation of the update equations,
    // kept independent of lstm_step's internals.
    fn reference_step(
        params: &LstmParams<f64>,
        state: &LstmState<f64>,
        x: &[f64],
    ) -> (Vec<f64>, Vec<f64>) {
        let h = params.hidden_dim();
        let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
        let pre = |gate: usize, k: usize| {
            let mut z = params.bias[gate].data()[k];
            for (j, &xv) in x.iter().enumerate() {
                z += params.w_input[gate].at(k, j) * xv;
            }
            for j in 0..h {
                z += params.w_recurrent[gate].at(k, j) * state.hidden.data()[j];
            }
            if gate == GATE_FORGET {
                z += params.forget_bias_offset;
            }
            z
        };
        let mut hidden = vec![0.0; h];
        let mut cell = vec![0.0; h];
        for k in 0..h {
            let i = sig(pre(GATE_INPUT, k));
            let f = sig(pre(GATE_FORGET, k));
            let g = pre(GATE_CANDIDATE, k).tanh();
            let o = sig(pre(GATE_OUTPUT, k));
            cell[k] = f * state.cell.data()[k] + i * g;
            hidden[k] = o * cell[k].tanh();
        }
        (hidden, cell)
    }

    fn random_params(input_dim: usize, hidden_dim: usize, seed: u64) -> LstmParams<f64> {
        let mut rng = RngStream::new(seed);
        let mut p = LstmParams::init(input_dim, hidden_dim, 0.5, &mut rng);
        p.forget_bias_offset = 1.0;
        for b in p.bias.iter_mut() {
            for v in b.data_mut() {
                *v = rng.uniform(-0.5, 0.5);
            }
        }
        p
    }

    #[test]
    fn step_matches_reference_formulas() {
        let params = random_params(3, 4, 99);
        let mut rng = RngStream::new(100);
        let state = LstmState {
            hidden: Tb::vector((0..4).map(|_| rng.uniform(-1.0, 1.0)).collect()),
            cell: Tb::vector((0..4).map(|_| rng.uniform(-1.0, 1.0)).collect()),
        };
        let x = Tb::vector(vec![0.3, -0.8, 1.1]);
        let (next, _) = lstm_step(&params, &state, &x).unwrap();
        let (h_ref, c_ref) = reference_step(&params, &state, x.data());
        for k in 0..4 {
            assert!((next.hidden.data()[k] - h_ref[k]).abs() < 1e-12);
            assert!((next.cell.data()[k] - c_ref[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let params = LstmParams::<f64>::zeros(3, 4);
        let state = LstmState::zeros(4);
        assert!(lstm_step(&params, &state, &Tb::vector(vec![1.0])).is_err());
    }

    // Single-step gradient check: loss = sum(h') + sum(c'), differentiated
    // w.r.t. the input, previous state, and all weights.
    #[test]
    fn single_step_backward_matches_finite_differences() {
        let params = random_params(3, 4, 7);
        let mut rng = RngStream::new(8);
        let h0: Vec<f64> = (0..4).map(|_| rng.uniform(-0.8, 0.8)).collect();
        let c0: Vec<f64> = (0..4).map(|_| rng.uniform(-0.8, 0.8)).collect();
        let x0: Vec<f64> = (0..3).map(|_| rng.uniform(-1.0, 1.0)).collect();

        let eval = |params: &LstmParams<f64>, h0: &[f64], c0: &[f64], x: &[f64]| {
            let state = LstmState {
                hidden: Tb::vector(h0.to_vec()),
                cell: Tb::vector(c0.to_vec()),
            };
            let (next, _) = lstm_step(params, &state, &Tb::vector(x.to_vec())).unwrap();
            next.hidden.data().iter().sum::<f64>() + next.cell.data().iter().sum::<f64>()
        };

        let state = LstmState {
            hidden: Tb::vector(h0.clone()),
            cell: Tb::vector(c0.clone()),
        };
        let (_, cache) = lstm_step(&params, &state, &Tb::vector(x0.clone())).unwrap();
        let mut grads = params.zero_grads();
        let ones = Tb::vector(vec![1.0; 4]);
        let (dh_prev, dc_prev, dx) =
            lstm_step_backward(&params, &cache, &ones, &ones, &mut grads);

        let fd_x =
            finite_difference_gradient(|x| eval(&params, &h0, &c0, x), &x0, 1e-5).unwrap();
        assert!(max_relative_error(dx.data(), &fd_x) < 1e-7);

        let fd_h =
            finite_difference_gradient(|h| eval(&params, h, &c0, &x0), &h0, 1e-5).unwrap();
        assert!(max_relative_error(dh_prev.data(), &fd_h) < 1e-7);

        let fd_c =
            finite_difference_gradient(|c| eval(&params, &h0, c, &x0), &c0, 1e-5).unwrap();
        assert!(max_relative_error(dc_prev.data(), &fd_c) < 1e-7);

        // Spot-check one weight matrix per family via perturbation.
        for gate in 0..4 {
            let theta: Vec<f64> = params.w_input[gate].data().to_vec();
            let fd = finite_difference_gradient(
                |w| {
                    let mut p = params.clone();
                    p.w_input[gate].data_mut().copy_from_slice(w);
                    eval(&p, &h0, &c0, &x0)
                },
                &theta,
                1e-5,
            )
            .unwrap();
            assert!(
                max_relative_error(grads.w_input[gate].data(), &fd) < 1e-6,
                "gate {}",
                GATE_NAMES[gate]
            );
        }
    }

    use crate::rng::RngStream;
}
