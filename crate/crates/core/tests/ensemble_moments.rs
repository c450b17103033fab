use levelflow::ensemble::{sample_coupled, sample_goe, stream, EnsembleSpec};

fn variances(n: usize, draws: usize, sample: impl Fn(u64) -> levelflow::SymMatrix) -> (Vec<Vec<f64>>, f64) {
    let mut acc = vec![vec![0.0; n]; n];
    let mut mean_entry = 0.0;
    for d in 0..draws {
        let h = sample(d as u64);
        for (i, row) in acc.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate().skip(i) {
                let x = h.get(i, j);
                *slot += x * x;
                mean_entry += x;
            }
        }
    }
    for row in &mut acc {
        for v in row.iter_mut() {
            *v /= draws as f64;
        }
    }
    (acc, mean_entry / (draws * n * (n + 1) / 2) as f64)
}

fn average(acc: &[Vec<f64>], keep: impl Fn(usize, usize) -> bool) -> f64 {
    let n = acc.len();
    let vals: Vec<f64> = (0..n)
        .flat_map(|i| (i..n).map(move |j| (i, j)))
        .filter(|&(i, j)| keep(i, j))
        .map(|(i, j)| acc[i][j])
        .collect();
    vals.iter().sum::<f64>() / vals.len() as f64
}

#[test]
fn goe_entry_variances() {
    let n = 50;
    let draws = 10_000;
    let alpha = 0.5;
    let (acc, mean) = variances(n, draws, |d| sample_goe(n, alpha, &mut stream(1000 + d)).unwrap());
    let diag = average(&acc, |i, j| i == j);
    let off = average(&acc, |i, j| i != j);
    // 500k diagonal and 12M off-diagonal squares
    assert!((diag - 1.0 / (2.0 * alpha)).abs() < 0.01, "diag {diag}");
    assert!((off - 1.0 / (4.0 * alpha)).abs() < 0.003, "off {off}");
    assert!(mean.abs() < 0.002, "mean {mean}");
}

#[test]
fn cross_block_variance_ratio() {
    let (n, m, lambda) = (50, 25, 0.5);
    let spec = EnsembleSpec::new(n, m, lambda, 0.5, 0).unwrap();
    let (acc, _) = variances(n, 10_000, |d| sample_coupled(&spec, &mut stream(50_000 + d)).unwrap());
    let inside = average(&acc, |i, j| i != j && !spec.is_cross_block(i, j));
    let cross = average(&acc, |i, j| spec.is_cross_block(i, j));
    let ratio = cross / inside;
    assert!(
        (ratio - lambda * lambda).abs() < 0.05 * lambda * lambda,
        "ratio {ratio}"
    );
}
