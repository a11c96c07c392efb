//! Writes one shot file per mean photon number.

use std::path::PathBuf;

use clickstat::dataio::{write_shots, ShotHeader};
use clickstat::forward_model::{ResponseParams, ShotSampler};
use clickstat::sweep::point_seed;
use rayon::prelude::*;

use super::nbar_list;
use crate::config::Settings;
use crate::error::{CliError, CliResult};

pub fn file_name(n_bins: usize, index: usize) -> String {
    format!("shots_N{n_bins}_{index:02}.csv")
}

pub fn run(s: &Settings) -> CliResult<()> {
    let n_bins = s.require_n_bins()?;
    let eta = s.eta.ok_or_else(|| CliError::Validation("--eta is required".into()))?;
    let params = ResponseParams::new(s.nu.unwrap_or(0.0), eta, s.gamma.unwrap_or(0.0), n_bins)?;
    let nbars = nbar_list(s, n_bins)?;
    let dir = s.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::from(e).at(&dir))?;
    let (seed, shots) = (s.seed(), s.shots());

    let paths = nbars
        .par_iter()
        .enumerate()
        .map(|(i, &nbar)| {
            let sampler = ShotSampler::coherent(&params, nbar, point_seed(seed, i))?;
            let mut header = ShotHeader::new(n_bins).with_seed(seed).with_nbar(nbar);
            header.extra.insert("point".into(), i.to_string());
            header.extra.insert("eta".into(), format!("{eta:?}"));
            header.extra.insert("nu".into(), format!("{:?}", params.nu));
            header.extra.insert("gamma".into(), format!("{:?}", params.gamma));
            let path = dir.join(file_name(n_bins, i));
            write_shots(&path, &header, sampler.shots(shots)).map_err(|e| CliError::from(e).at(&path))?;
            Ok(path)
        })
        .collect::<CliResult<Vec<_>>>()?;
    for p in paths {
        println!("{}", p.display());
    }
    Ok(())
}
