use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::network::QNetwork;
use super::spec::NetworkSpec;
use super::NetError;

/// `|a - n| / max(1e-12, |a| + |n|)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-12)
}

/// Compares backpropagated gradients against central differences with step
/// `h` on `probes` parameters, spread round-robin over every tensor.
/// Returns the worst relative error.
pub fn grad_check(spec: &NetworkSpec, seed: u64, probes: usize, h: f64) -> Result<f64, NetError> {
    let mut net = QNetwork::init(spec.clone(), seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let n_in = spec.input_len();
    let n_out = spec.output_units();
    let obs: Vec<Vec<f64>> = (0..3).map(|_| (0..n_in).map(|_| rng.gen::<f64>()).collect()).collect();
    let batch: Vec<&[f64]> = obs.iter().map(Vec::as_slice).collect();
    let actions: Vec<usize> = (0..3).map(|_| rng.gen_range(0..n_out)).collect();
    let targets: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();

    let (_, grads) = net.backward(&batch, &actions, &targets)?;
    let n_tensors = grads.tensors.len();
    let mut worst = 0.0f64;
    for k in 0..probes {
        let t = k % n_tensors;
        let idx = rng.gen_range(0..grads.tensors[t].len());
        let original = net.params().tensors[t].data()[idx];
        net.params_mut().tensors[t].data_mut()[idx] = original + h;
        let plus = net.loss(&batch, &actions, &targets)?;
        net.params_mut().tensors[t].data_mut()[idx] = original - h;
        let minus = net.loss(&batch, &actions, &targets)?;
        net.params_mut().tensors[t].data_mut()[idx] = original;
        let numeric = (plus - minus) / (2.0 * h);
        worst = worst.max(relative_error(grads.tensors[t].data()[idx], numeric));
    }
    Ok(worst)
}

/// Architectures exercised by the gradient check: a small dense stack, a
/// small two-convolution stack, and the default pixel network.
pub fn test_matrix() -> Vec<(&'static str, NetworkSpec)> {
    vec![
        ("dense", "12:dense16,relu,dense16,relu,dense3".parse().unwrap()),
        (
            "conv",
            "4x10x10:conv8k4s2,relu,conv8k2s1,relu,dense16,relu,dense3"
                .parse()
                .unwrap(),
        ),
        ("pixel", NetworkSpec::default_pixel()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_error_cases() {
        assert_eq!(relative_error(0.0, 0.0), 0.0);
        assert_eq!(relative_error(1.0, 1.0), 0.0);
        assert_eq!(relative_error(1.0, -1.0), 1.0);
    }

    #[test]
    fn small_architectures_pass() {
        for (name, spec) in test_matrix().into_iter().take(2) {
            let err = grad_check(&spec, 7, 200, 1e-5).unwrap();
            assert!(err < 1e-4, "{name}: {err}");
        }
    }

    #[test]
    fn coarse_step_is_worse() {
        let spec = &test_matrix()[1].1;
        let fine = grad_check(spec, 3, 60, 1e-5).unwrap();
        let coarse = grad_check(spec, 3, 60, 1e-1).unwrap();
        assert!(coarse > fine, "coarse {coarse} fine {fine}");
    }
}
