//! Writes the built-in channels as JSON channel files.
//!
//! `cargo run -p qtraj --example write_catalog -- <dir>`

use std::path::{Path, PathBuf};

use qtraj::channel::{catalog, KrausChannel};
use qtraj::exact::certify::examples;
use qtraj::exact::ExactMatrix;
use qtraj::experiments::half_haar_half_identity;
use qtraj::io::{to_json, write_text, ChannelFile, DensityFile};
use qtraj::randomization::RandomizationSpec;

fn write(
    dir: &Path,
    name: &str,
    ch: &KrausChannel,
    rand: &RandomizationSpec,
    exact: Option<&[ExactMatrix]>,
) -> qtraj::Result<()> {
    let file = ChannelFile::from_channel(Some(name), ch, rand, exact);
    write_text(&dir.join(format!("{name}.json")), &to_json(&file)?)
}

fn main() -> qtraj::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "channels".into()));
    std::fs::create_dir_all(&dir).map_err(|e| qtraj::Error::Io(e.to_string()))?;
    let haar = |_k: usize| RandomizationSpec::Haar;

    let dep2 = catalog::depolarizing(2, 0.5)?;
    write(&dir, "depolarizing-d2", &dep2, &haar(dep2.rank()), None)?;
    let dep3 = catalog::depolarizing(3, 0.5)?;
    write(&dir, "depolarizing-d3", &dep3, &haar(dep3.rank()), None)?;

    let rho0 = catalog::diagonal_density(&[2.0 / 3.0, 1.0 / 3.0]);
    let proj = catalog::projection(&rho0)?;
    write(&dir, "projection", &proj, &haar(proj.rank()), None)?;
    let pert = catalog::perturbed_depolarizing(0.5, &rho0)?;
    write(&dir, "perturbed-depolarizing", &pert, &haar(pert.rank()), None)?;

    let ce = catalog::two_atom_counterexample();
    write(&dir, "counterexample", &ce, &half_haar_half_identity(ce.rank()), None)?;
    let swap = catalog::swap();
    write(&dir, "swap", &swap, &RandomizationSpec::identity(swap.rank()), None)?;

    // Exact forms carry the integer matrices; certificates are scale invariant.
    let e1 = catalog::example_one();
    write(&dir, "example1-3d", &e1, &haar(e1.rank()), Some(&examples::example_one()))?;
    let e2 = catalog::example_two();
    write(&dir, "example2-3d", &e2, &haar(e2.rank()), Some(&examples::example_two()))?;

    let rho = DensityFile::from_matrix(&rho0);
    write_text(&dir.join("rho0.json"), &to_json(&rho)?)?;
    Ok(())
}
