//! Binary logistic regression with an L2 penalty, fitted by full-batch
//! gradient descent on standardised features for a fixed iteration budget.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    /// Penalty weight on the squared coefficient norm (intercept excluded).
    pub l2: f64,
    pub learning_rate: f64,
    pub iterations: usize,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self {
            l2: 0.01,
            learning_rate: 0.5,
            iterations: 500,
        }
    }
}

pub fn default_logistic_grid() -> Vec<LogisticParams> {
    [0.001, 0.01, 0.1, 1.0]
        .into_iter()
        .map(|l2| LogisticParams {
            l2,
            ..LogisticParams::default()
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct LogisticRegression {
    mean: Vec<f64>,
    scale: Vec<f64>,
    weights: Vec<f64>,
    intercept: f64,
    /// Penalised mean log-loss before each update.
    pub loss_history: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LogisticRegression {
    /// `labels` must be 0 or 1.
    pub fn fit(x: &[Vec<f64>], labels: &[usize], params: &LogisticParams) -> LogisticRegression {
        let n = x.len() as f64;
        let d = x[0].len();
        let mut mean = vec![0.0; d];
        for row in x {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v / n;
            }
        }
        let mut scale = vec![0.0; d];
        for row in x {
            for j in 0..d {
                scale[j] += (row[j] - mean[j]).powi(2) / n;
            }
        }
        for s in &mut scale {
            *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
        }
        let z: Vec<Vec<f64>> = x
            .iter()
            .map(|row| (0..d).map(|j| (row[j] - mean[j]) / scale[j]).collect())
            .collect();

        let mut w = vec![0.0; d];
        let mut b = 0.0;
        let mut loss_history = Vec::with_capacity(params.iterations);
        for _ in 0..params.iterations {
            let mut gw = vec![0.0; d];
            let mut gb = 0.0;
            let mut loss = 0.0;
            for (row, &y) in z.iter().zip(labels) {
                let s: f64 = b + row.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>();
                let p = sigmoid(s);
                let yf = y as f64;
                // log(1 + e^s) - y s, written to avoid overflow
                loss += s.max(0.0) + (-s.abs()).exp().ln_1p() - yf * s;
                let g = p - yf;
                gb += g;
                for (acc, v) in gw.iter_mut().zip(row) {
                    *acc += g * v;
                }
            }
            let norm: f64 = w.iter().map(|v| v * v).sum();
            loss_history.push(loss / n + 0.5 * params.l2 * norm);
            for j in 0..d {
                w[j] -= params.learning_rate * (gw[j] / n + params.l2 * w[j]);
            }
            b -= params.learning_rate * gb / n;
        }
        LogisticRegression {
            mean,
            scale,
            weights: w,
            intercept: b,
            loss_history,
        }
    }

    pub fn probability(&self, row: &[f64]) -> f64 {
        let s: f64 = self.intercept
            + row
                .iter()
                .enumerate()
                .map(|(j, v)| (v - self.mean[j]) / self.scale[j] * self.weights[j])
                .sum::<f64>();
        sigmoid(s)
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        usize::from(self.probability(row) > 0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separates_a_line() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 * 100.0, 3.0]).collect();
        let y: Vec<usize> = (0..20).map(|i| usize::from(i >= 10)).collect();
        let m = LogisticRegression::fit(&x, &y, &LogisticParams::default());
        for (r, &l) in x.iter().zip(&y) {
            assert_eq!(m.predict(r), l);
        }
        assert!(m.loss_history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn balanced_noise_stays_near_half() {
        let x: Vec<Vec<f64>> = (0..4).map(|_| vec![1.0]).collect();
        let m = LogisticRegression::fit(&x, &[0, 1, 0, 1], &LogisticParams::default());
        assert!((m.probability(&[1.0]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert_eq!(sigmoid(1000.0), 1.0);
        assert_eq!(sigmoid(0.0), 0.5);
    }
}
