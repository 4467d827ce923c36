//! Nelder–Mead downhill simplex.

use crate::error::{CcaError, Result};

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    pub max_iterations: usize,
    /// Converged once every vertex lies within this max-norm distance of the best.
    pub diameter_tol: f64,
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            max_iterations: 500,
            diameter_tol: 1e-3,
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub best: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimises `f` starting from `start`, with per-coordinate initial steps.
pub fn minimize<F>(mut f: F, start: &[f64], steps: &[f64], opts: &SimplexOptions) -> Result<SimplexResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let dim = start.len();
    assert_eq!(dim, steps.len(), "one initial step per coordinate");
    let mut eval = |x: &[f64]| -> Result<f64> {
        let v = f(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(CcaError::NonFiniteObjective(x.to_vec()))
        }
    };

    let mut vertices = vec![start.to_vec()];
    for i in 0..dim {
        let mut v = start.to_vec();
        v[i] += steps[i];
        vertices.push(v);
    }
    let mut values = vertices.iter().map(|v| eval(v)).collect::<Result<Vec<_>>>()?;

    let mut iterations = 0;
    let mut converged = false;
    loop {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        vertices = order.iter().map(|&i| vertices[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let diameter = vertices[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&vertices[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if diameter < opts.diameter_tol {
            converged = true;
            break;
        }
        if iterations == opts.max_iterations {
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..dim)
            .map(|k| vertices[..dim].iter().map(|v| v[k]).sum::<f64>() / dim as f64)
            .collect();
        let along = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&vertices[dim])
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };

        let reflected = along(opts.reflection);
        let f_reflected = eval(&reflected)?;
        if f_reflected < values[0] {
            let expanded = along(opts.reflection * opts.expansion);
            let f_expanded = eval(&expanded)?;
            if f_expanded < f_reflected {
                vertices[dim] = expanded;
                values[dim] = f_expanded;
            } else {
                vertices[dim] = reflected;
                values[dim] = f_reflected;
            }
            continue;
        }
        if f_reflected < values[dim - 1] {
            vertices[dim] = reflected;
            values[dim] = f_reflected;
            continue;
        }

        let (candidate, threshold) = if f_reflected < values[dim] {
            (along(opts.reflection * opts.contraction), f_reflected)
        } else {
            (along(-opts.contraction), values[dim])
        };
        let f_candidate = eval(&candidate)?;
        if f_candidate < threshold {
            vertices[dim] = candidate;
            values[dim] = f_candidate;
            continue;
        }

        let best = vertices[0].clone();
        for i in 1..=dim {
            for k in 0..dim {
                vertices[i][k] = best[k] + opts.shrink * (vertices[i][k] - best[k]);
            }
            values[i] = eval(&vertices[i])?;
        }
    }

    Ok(SimplexResult {
        best: vertices[0].clone(),
        value: values[0],
        iterations,
        converged,
    })
}
