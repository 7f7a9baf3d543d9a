//! Checkpoints: encoder weights and Adam moments as f64 TGM matrices plus
//! a JSON sidecar with dimensions, activation, seed, and the next epoch to
//! run. Loading restores training state bit-exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};
use topogcl_core::contrast::trainer::TrainState;
use topogcl_core::numerics::AdamState;
use topogcl_core::tgm::{read_matrix, write_matrix, DType};
use topogcl_core::{Activation, EncoderParams, Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    input_dim: usize,
    hidden_dim: usize,
    output_dim: usize,
    activation: String,
    seed: u64,
    next_epoch: usize,
    adam_step: u64,
}

const FILES: [&str; 6] = [
    "w1.tgm",
    "w2.tgm",
    "adam_m1.tgm",
    "adam_m2.tgm",
    "adam_v1.tgm",
    "adam_v2.tgm",
];

/// Writes a checkpoint directory (created if missing).
pub fn save_checkpoint(
    dir: &Path,
    params: &EncoderParams,
    adam: &AdamState,
    next_epoch: usize,
    seed: u64,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let m = adam.first_moments();
    let v = adam.second_moments();
    if m.len() != 2 || v.len() != 2 {
        return Err(Error::invalid("checkpoint expects exactly two parameters"));
    }
    for (name, matrix) in FILES
        .iter()
        .zip([&params.w1, &params.w2, &m[0], &m[1], &v[0], &v[1]])
    {
        write_matrix(&dir.join(name), matrix, DType::F64)?;
    }
    let (input_dim, hidden_dim, output_dim) = params.dims();
    let sidecar = Sidecar {
        input_dim,
        hidden_dim,
        output_dim,
        activation: params.activation.name().to_string(),
        seed,
        next_epoch,
        adam_step: adam.step_count(),
    };
    let json = serde_json::to_string_pretty(&sidecar)?;
    std::fs::write(dir.join("checkpoint.json"), json + "\n")?;
    Ok(())
}

/// Loads a checkpoint, verifying the stored seed matches the run's seed so
/// a resumed run continues the same substream schedule.
pub fn load_checkpoint(dir: &Path, expected_seed: u64) -> Result<TrainState> {
    let sidecar_path = dir.join("checkpoint.json");
    let text = std::fs::read_to_string(&sidecar_path)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", sidecar_path.display())))?;
    let sidecar: Sidecar = serde_json::from_str(&text)?;
    if sidecar.seed != expected_seed {
        return Err(Error::invalid(format!(
            "checkpoint was trained with seed {}, run requested seed {expected_seed}; \
             resuming across seeds breaks the substream schedule",
            sidecar.seed
        )));
    }
    let [w1, w2, m1, m2, v1, v2] = FILES.map(|name| read_matrix(&dir.join(name)));
    let (w1, w2) = (w1?, w2?);
    if w1.rows() != sidecar.input_dim
        || w1.cols() != sidecar.hidden_dim
        || w2.rows() != sidecar.hidden_dim
        || w2.cols() != sidecar.output_dim
    {
        return Err(Error::malformed(
            "checkpoint matrices disagree with the sidecar dimensions",
        ));
    }
    let params = EncoderParams {
        w1,
        w2,
        activation: Activation::from_name(&sidecar.activation)?,
    };
    let adam = AdamState::from_parts(vec![m1?, m2?], vec![v1?, v2?], sidecar.adam_step)?;
    Ok(TrainState {
        params,
        adam,
        next_epoch: sidecar.next_epoch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use topogcl_core::numerics::DenseMatrix;
    use topogcl_core::Rng;

    fn sample_params(seed: u64) -> EncoderParams {
        let mut rng = Rng::seed_from(seed);
        EncoderParams::init(5, 4, 3, Activation::Relu, &mut rng).unwrap()
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let params = sample_params(1);
        let mut adam = AdamState::new(&[&params.w1, &params.w2]);
        // Take a step so the moments are nonzero.
        let mut p = params.clone();
        let g1 = DenseMatrix::from_fn(5, 4, |r, c| (r + c) as f64 * 0.1);
        let g2 = DenseMatrix::from_fn(4, 3, |r, c| (r * c) as f64 * 0.1 - 0.2);
        adam.step(&mut [&mut p.w1, &mut p.w2], &[&g1, &g2], 1e-3)
            .unwrap();

        save_checkpoint(dir.path(), &p, &adam, 7, 99).unwrap();
        let state = load_checkpoint(dir.path(), 99).unwrap();
        assert_eq!(state.params.w1, p.w1);
        assert_eq!(state.params.w2, p.w2);
        assert_eq!(state.next_epoch, 7);
        assert_eq!(state.adam.step_count(), 1);
        assert_eq!(state.adam.first_moments()[0], adam.first_moments()[0]);
        assert_eq!(state.adam.second_moments()[1], adam.second_moments()[1]);
    }

    #[test]
    fn seed_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let params = sample_params(2);
        let adam = AdamState::new(&[&params.w1, &params.w2]);
        save_checkpoint(dir.path(), &params, &adam, 3, 10).unwrap();
        let err = load_checkpoint(dir.path(), 11).unwrap_err();
        assert!(err.to_string().contains("seed"), "{err}");
    }

    #[test]
    fn corrupt_sidecar_dimensions_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let params = sample_params(3);
        let adam = AdamState::new(&[&params.w1, &params.w2]);
        save_checkpoint(dir.path(), &params, &adam, 0, 5).unwrap();
        let text = std::fs::read_to_string(dir.path().join("checkpoint.json")).unwrap();
        std::fs::write(
            dir.path().join("checkpoint.json"),
            text.replace("\"hidden_dim\": 4", "\"hidden_dim\": 9"),
        )
        .unwrap();
        assert!(load_checkpoint(dir.path(), 5).is_err());
    }
}
