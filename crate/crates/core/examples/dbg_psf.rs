use blindsr::experiments::*;
use blindsr::solver::SolverConfig;

fn main() {
    let spec = PsfDictionarySpec::default();
    for seed in [7u64, 1, 2, 3] {
        match psf_mismatch_trial(&spec, 3, 4.0, seed, &SolverConfig::default()) {
            Ok(out) => {
                let above: Vec<(f64,f64)> = out.profile.iter().copied().filter(|&(_, v)| v >= 0.99).take(8).collect();
                println!("seed {seed}: status {:?} iters {} detected {} supports {:?} rel {:.2e} mismatch {:?}",
                    out.record.status, out.record.iterations, out.record.detected,
                    out.record.support_errors, out.record.relative_frobenius_error,
                    out.mismatch_residuals.iter().map(|v| format!("{v:.1e}")).collect::<Vec<_>>());
                let pmax = out.profile.iter().map(|&(_,v)| v).fold(0.0, f64::max);
                println!("   profile max {pmax:.4}, first points >=0.99: {above:?}");
            }
            Err(e) => println!("seed {seed}: error {e}"),
        }
    }
}
