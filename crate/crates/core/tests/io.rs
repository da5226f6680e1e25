mod common;

use common::*;
use grasspod::harness::{train, Dataset, ExperimentConfig};
use grasspod::io::*;
use grasspod::pdelab::Problem;
use grasspod::{ReferencePolicy, SnapshotMatrix, TrainConfig};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn awkward_values(rows: usize, cols: usize) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut m = gaussian_matrix(rows, cols, &mut rng);
    m[(0, 0)] = -0.0;
    m[(1, 0)] = f64::MIN_POSITIVE / 3.0;
    m[(2, 0)] = 1e300;
    m[(0, 1)] = 0.1 + 0.2;
    m[(1, 1)] = -123456789.00000001;
    m
}

fn bits(m: &DMatrix<f64>) -> Vec<u64> {
    m.iter().map(|x| x.to_bits()).collect()
}

#[test]
fn snapshot_files_are_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let m = awkward_values(7, 5);
    let path = dir.path().join("m.gpm");
    write_snapshot_file(&path, &m).unwrap();
    let back = read_snapshot_file(&path).unwrap();
    assert_eq!(back.shape(), m.shape());
    assert_eq!(bits(&back), bits(&m));
}

#[test]
fn csv_matrices_are_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let m = awkward_values(9, 4);
    let path = dir.path().join("m.csv");
    write_csv_matrix(&path, &m).unwrap();
    assert_eq!(bits(&read_csv_matrix(&path).unwrap()), bits(&m));
}

#[test]
fn corrupt_snapshot_is_rejected() {
    let bytes = encode_snapshot(&awkward_values(3, 3)).unwrap();
    assert!(decode_snapshot(&bytes[..bytes.len() - 1]).is_err());
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(decode_snapshot(&bad).is_err());
}

#[test]
fn saved_models_predict_identically() {
    let cases: Vec<SnapshotMatrix<f64>> = (0..6)
        .map(|k| {
            let a = 1.0 + k as f64 * 0.15;
            let d = DMatrix::from_fn(30, 8, |i, j| ((i + 1) as f64 * a * 0.1 + j as f64 * 0.3).sin() + 0.01 * (i * j) as f64);
            SnapshotMatrix::new(d, vec![a], format!("c{k}")).unwrap()
        })
        .collect();
    let data = Dataset::new(cases.clone(), 2).unwrap();
    let cfg = ExperimentConfig {
        rank: 2,
        train: TrainConfig::burgers(),
        reference: ReferencePolicy::MinimaxCenter,
    };
    let model = train(&data, &[0, 2, 4, 5], &cfg).unwrap();
    let refs: Vec<&SnapshotMatrix<f64>> = [0, 2, 4, 5].iter().map(|&i| &cases[i]).collect();
    let file = ModelFile::new(Problem::External, 2, cfg.train.clone(), cfg.reference, &model, Fingerprint::of(&refs, 2));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    file.save(&path).unwrap();
    let loaded = ModelFile::load(&path).unwrap();
    assert_eq!(loaded, file);
    assert_eq!(loaded.to_bytes().unwrap(), file.to_bytes().unwrap());
    let restored = loaded.to_trained().unwrap();
    for theta in [[1.0], [1.2], [1.7]] {
        let a = model.predict_cxgb(&theta).unwrap().basis;
        let b = restored.predict_cxgb(&theta).unwrap().basis;
        assert_eq!(bits(a.matrix()), bits(b.matrix()));
    }
    assert!(loaded.check_compatible(30, 2).is_ok());
    assert!(loaded.check_compatible(30, 3).is_err());
}
