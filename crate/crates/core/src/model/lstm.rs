use super::params::{mat_vec_acc, outer_acc, vec_mat_acc};

/// Location of one LSTM layer's weights in the parameter buffer. Gates are
/// laid out as `[input, forget, output, candidate]` blocks of `hidden` columns.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LstmLayout {
    pub wx: usize,
    pub wh: usize,
    pub b: usize,
    pub input: usize,
    pub hidden: usize,
}

/// Activations saved by the forward pass for backpropagation.
pub(crate) struct LstmTrace {
    /// Post-activation gates per step, `4 * hidden` each.
    gates: Vec<Vec<f64>>,
    cells: Vec<Vec<f64>>,
    tanh_cells: Vec<Vec<f64>>,
    pub hidden: Vec<Vec<f64>>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl LstmLayout {
    fn wx<'a>(&self, p: &'a [f64]) -> &'a [f64] {
        &p[self.wx..self.wx + self.input * 4 * self.hidden]
    }

    fn wh<'a>(&self, p: &'a [f64]) -> &'a [f64] {
        &p[self.wh..self.wh + self.hidden * 4 * self.hidden]
    }

    fn bias<'a>(&self, p: &'a [f64]) -> &'a [f64] {
        &p[self.b..self.b + 4 * self.hidden]
    }

    /// Runs the recurrence over `xs` in the order given.
    pub fn forward(&self, p: &[f64], xs: &[Vec<f64>]) -> LstmTrace {
        let h = self.hidden;
        let mut trace = LstmTrace {
            gates: Vec::with_capacity(xs.len()),
            cells: Vec::with_capacity(xs.len()),
            tanh_cells: Vec::with_capacity(xs.len()),
            hidden: Vec::with_capacity(xs.len()),
        };
        let zeros = vec![0.0; h];
        for x in xs {
            let h_prev = trace.hidden.last().unwrap_or(&zeros);
            let c_prev = trace.cells.last().unwrap_or(&zeros);
            let mut z = self.bias(p).to_vec();
            vec_mat_acc(x, self.wx(p), &mut z);
            vec_mat_acc(h_prev, self.wh(p), &mut z);
            for v in &mut z[..3 * h] {
                *v = sigmoid(*v);
            }
            for v in &mut z[3 * h..] {
                *v = v.tanh();
            }
            let c: Vec<f64> = (0..h)
                .map(|j| z[h + j] * c_prev[j] + z[j] * z[3 * h + j])
                .collect();
            let tc: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
            let hid: Vec<f64> = (0..h).map(|j| z[2 * h + j] * tc[j]).collect();
            trace.gates.push(z);
            trace.cells.push(c);
            trace.tanh_cells.push(tc);
            trace.hidden.push(hid);
        }
        trace
    }

    /// Backpropagates `dh` (loss gradient w.r.t. each step's hidden output)
    /// through time, accumulating weight gradients into `grad` and returning
    /// the gradient w.r.t. each input.
    pub fn backward(
        &self,
        p: &[f64],
        xs: &[Vec<f64>],
        trace: &LstmTrace,
        dh: &[Vec<f64>],
        grad: &mut [f64],
    ) -> Vec<Vec<f64>> {
        let h = self.hidden;
        let n = xs.len();
        let zeros = vec![0.0; h];
        let mut dxs = vec![vec![0.0; self.input]; n];
        let mut dh_next = vec![0.0; h];
        let mut dc_next = vec![0.0; h];
        let mut dz = vec![0.0; 4 * h];
        for t in (0..n).rev() {
            let g = &trace.gates[t];
            let c_prev = if t > 0 { &trace.cells[t - 1] } else { &zeros };
            let h_prev = if t > 0 { &trace.hidden[t - 1] } else { &zeros };
            let tc = &trace.tanh_cells[t];
            for j in 0..h {
                let (i, f, o, cand) = (g[j], g[h + j], g[2 * h + j], g[3 * h + j]);
                let dhj = dh[t][j] + dh_next[j];
                let dc = dhj * o * (1.0 - tc[j] * tc[j]) + dc_next[j];
                dz[j] = dc * cand * i * (1.0 - i);
                dz[h + j] = dc * c_prev[j] * f * (1.0 - f);
                dz[2 * h + j] = dhj * tc[j] * o * (1.0 - o);
                dz[3 * h + j] = dc * i * (1.0 - cand * cand);
                dc_next[j] = dc * f;
            }
            let (wx, wh, b) = (self.wx, self.wh, self.b);
            outer_acc(&xs[t], &dz, &mut grad[wx..wx + self.input * 4 * h]);
            outer_acc(h_prev, &dz, &mut grad[wh..wh + h * 4 * h]);
            for (gb, d) in grad[b..b + 4 * h].iter_mut().zip(&dz) {
                *gb += d;
            }
            mat_vec_acc(self.wx(p), &dz, &mut dxs[t]);
            dh_next.iter_mut().for_each(|v| *v = 0.0);
            mat_vec_acc(self.wh(p), &dz, &mut dh_next);
        }
        dxs
    }
}
