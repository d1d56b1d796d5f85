//! Matrix profile over a plain numeric series: for every window, the
//! z-normalized distance to its nearest non-trivial neighbour. Low
//! values mean "this shape repeats somewhere"; the lowest pair is the
//! top motif.
//!
//! Run with: cargo run --example matrix_profile

use tracekit::patterns::matrix_profile;

fn main() -> tracekit::Result<()> {
    // A noisy baseline with the same bump planted at three offsets.
    let n = 240;
    let mut series: Vec<f64> = (0..n)
        .map(|i| {
            let x = i as f64;
            10.0 + (x * 0.7).sin() * 0.3 + (x * 0.13).cos() * 0.2
        })
        .collect();
    for &at in &[30usize, 110, 190] {
        for (j, s) in series.iter_mut().skip(at).take(16).enumerate() {
            *s += (j as f64 / 15.0 * std::f64::consts::PI).sin() * 4.0;
        }
    }

    let m = 16;
    let mp = matrix_profile(&series, m, None)?;

    // The profile minimum sits on one planted bump and its nearest
    // neighbour is another copy.
    let (best, &dist) = mp
        .profile
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    println!("series of {n} points, window {m}");
    println!(
        "top motif: windows starting at {} and {} (distance {:.4})",
        best,
        mp.index[best].unwrap(),
        dist
    );

    // A coarse sketch of the profile: tall bars mean unique shapes.
    let max = mp.profile.iter().cloned().fold(0.0f64, f64::max);
    for (i, &d) in mp.profile.iter().enumerate().step_by(8) {
        let bar = "#".repeat((d / max * 40.0).round() as usize);
        println!("{i:>4} {d:>7.3} {bar}");
    }
    Ok(())
}
