//! `Q2MA_TOL="key=value,key=value"` overrides for the documented tolerance keys.

use q2ma_core::Tolerances;

use crate::error::CliError;

pub const ENV_VAR: &str = "Q2MA_TOL";

pub fn parse_overrides(spec: &str, base: Tolerances) -> Result<Tolerances, CliError> {
    let mut tol = base;
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("{ENV_VAR}: expected key=value, got `{item}`")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{ENV_VAR}: `{value}` is not a number")))?;
        if !(value > 0.0 && value.is_finite()) {
            return Err(CliError::Config(format!("{ENV_VAR}: `{key}` must be positive")));
        }
        if !tol.set(key.trim(), value) {
            return Err(CliError::Config(format!(
                "{ENV_VAR}: unknown key `{}` (known: {})",
                key.trim(),
                Tolerances::KEYS.join(", ")
            )));
        }
    }
    Ok(tol)
}

pub fn from_env() -> Result<Tolerances, CliError> {
    match std::env::var(ENV_VAR) {
        Ok(spec) => parse_overrides(&spec, Tolerances::default()),
        Err(_) => Ok(Tolerances::default()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_apply() {
        let tol = parse_overrides("block_match=1e-5, norm_loss=2e-6", Tolerances::default()).unwrap();
        assert_eq!(tol.block_match, 1e-5);
        assert_eq!(tol.norm_loss, 2e-6);
        assert_eq!(tol.hermitian, Tolerances::default().hermitian);
    }

    #[test]
    fn bad_overrides_fail() {
        assert!(parse_overrides("speed=1", Tolerances::default()).is_err());
        assert!(parse_overrides("hermitian", Tolerances::default()).is_err());
        assert!(parse_overrides("hermitian=-1", Tolerances::default()).is_err());
        assert!(parse_overrides("", Tolerances::default()).is_ok());
    }
}
