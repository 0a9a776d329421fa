//! Turning command-line flags into walk inputs.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use qwalk_core::{
    parse_protocol, BootstrapConfig, IndistinguishabilityModel, InitialStateSpec, Polarization,
    Protocol, Site,
};

use crate::error::{CliError, CliResult};

/// Balanced protocol `C(π/4) TX(π) C(π/4) TY(π)`.
pub const BALANCED_SOURCE: &str = "C(PI/4) TX(PI) C(PI/4) TY(PI)";

/// Photons of the two-photon experiment: `|A⟩` at `(−1, 0)`, `|D⟩` at `(1, 0)`.
pub const DEFAULT_PAIR: [&str; 2] = ["-1,0,A", "1,0,D"];

/// Single photon `|D⟩` at `(1, 0)`.
pub const DEFAULT_SINGLE: &str = "1,0,D";

/// Reads the protocol from a file when `source` names one, otherwise
/// parses `source` itself.
pub fn load_protocol(source: Option<&str>) -> CliResult<Protocol> {
    let source = source.unwrap_or(BALANCED_SOURCE);
    let path = Path::new(source);
    let (origin, text) = if path.is_file() {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        (path.display().to_string(), text)
    } else {
        ("<inline>".to_string(), source.to_string())
    };
    let protocol = parse_protocol(&text).map_err(|diag| CliError::Parse { origin, diag })?;
    if protocol.is_empty() {
        return Err(CliError::Config("protocol has no plates".into()));
    }
    Ok(protocol)
}

/// Parses `m,n,POL` or `m,n,up_re,up_im,down_re,down_im`.
pub fn parse_photon(text: &str) -> CliResult<InitialStateSpec<f64>> {
    let bad = |why: &str| CliError::Config(format!("photon '{text}': {why}"));
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 && parts.len() != 6 {
        return Err(bad("expected m,n,POL or m,n,up_re,up_im,down_re,down_im"));
    }
    let coord = |s: &str| {
        s.parse::<i32>()
            .map_err(|_| bad("site coordinates must be integers"))
    };
    let site = Site::new(coord(parts[0])?, coord(parts[1])?);
    if parts.len() == 3 {
        let pol = Polarization::parse(parts[2])
            .ok_or_else(|| bad("polarization must be one of L, R, H, V, D, A"))?;
        return Ok(InitialStateSpec::polarized(site, pol));
    }
    let mut x = [0.0; 4];
    for (slot, s) in x.iter_mut().zip(&parts[2..]) {
        *slot = s.parse().map_err(|_| bad("amplitudes must be numbers"))?;
    }
    InitialStateSpec::new(site, Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3]))
        .map_err(|e| bad(&e.to_string()))
}

pub fn single_photon(specs: &[String]) -> CliResult<InitialStateSpec<f64>> {
    match specs {
        [] => parse_photon(DEFAULT_SINGLE),
        [one] => parse_photon(one),
        _ => Err(CliError::Config(format!(
            "this command takes one photon, {} given",
            specs.len()
        ))),
    }
}

pub fn photon_pair(specs: &[String]) -> CliResult<(InitialStateSpec<f64>, InitialStateSpec<f64>)> {
    match specs {
        [] => Ok((
            parse_photon(DEFAULT_PAIR[0])?,
            parse_photon(DEFAULT_PAIR[1])?,
        )),
        [a, b] => Ok((parse_photon(a)?, parse_photon(b)?)),
        _ => Err(CliError::Config(format!(
            "this command takes two photons, {} given",
            specs.len()
        ))),
    }
}

pub fn model(c0: f64) -> CliResult<IndistinguishabilityModel<f64>> {
    IndistinguishabilityModel::new(c0).map_err(|e| CliError::Config(e.to_string()))
}

pub fn bootstrap(n_boot: usize, seed: u64) -> CliResult<BootstrapConfig> {
    BootstrapConfig::new(n_boot, seed).map_err(|e| CliError::Config(e.to_string()))
}

/// Creates `dir` if needed and returns the path of `name` inside it.
pub fn out_path(dir: &Path, name: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    Ok(dir.join(name))
}

/// Sizes the global thread pool from `QWALK_THREADS` when set.
pub fn init_threads(value: Option<&str>) -> CliResult<()> {
    let Some(v) = value else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Config(format!(
            "QWALK_THREADS must be a positive integer, got '{v}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn photon_forms() {
        let a = parse_photon("-1,0,A").unwrap();
        assert_eq!(a.site, Site::new(-1, 0));
        let b = parse_photon("2, 3, 1, 0, 0, 0").unwrap();
        assert_eq!(b.up, Complex64::new(1.0, 0.0));
        assert!(parse_photon("1,0,Q").is_err());
        assert!(parse_photon("1,0,1,0,1,0").is_err());
        assert!(parse_photon("x,0,L").is_err());
    }

    #[test]
    fn inline_protocol_and_diagnostics() {
        assert_eq!(load_protocol(None).unwrap(), Protocol::balanced());
        let err = load_protocol(Some("C(PI) FOO")).unwrap_err();
        assert_eq!(err.exit_code(), crate::error::EXIT_CONFIG);
        assert!(err.to_string().starts_with("<inline>:1:"), "{err}");
    }
}
