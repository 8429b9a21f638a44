//! Plain-text signal description files.
//!
//! Key = value lines, `#` comments, lists comma-separated:
//!
//! ```text
//! # degree-4 demo signal
//! poly = 5, -0.004, 0.0003, -0.00002, 0.000001
//! harmonic = 1.0, 0.5, 0.0     # amplitude, angular frequency, phase
//! sigma = 0.7
//! seed = 42
//! t_start = 0
//! t_end = 20000
//! dt = 1
//! ```
//!
//! `harmonic` may repeat. The range keys are only used by `generate`;
//! `run --truth` ignores them.

use hound_core::{Harmonic, SignalSpec};

#[derive(Debug, Clone, Default)]
pub struct RangeSpec {
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
}

pub fn parse_signal_config(text: &str) -> Result<(SignalSpec, RangeSpec), String> {
    let mut spec = SignalSpec {
        poly: Vec::new(),
        harmonics: Vec::new(),
        noise_sigma: 0.0,
        seed: 0,
    };
    let mut range = RangeSpec::default();

    for (line_no, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", line_no + 1))?;
        let key = key.trim();
        let value = value.trim();
        let parse_f64 = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| format!("line {}: bad number `{v}`", line_no + 1))
        };
        match key {
            "poly" => {
                spec.poly = value
                    .split(',')
                    .map(|v| parse_f64(v.trim()))
                    .collect::<Result<_, _>>()?;
            }
            "harmonic" => {
                let parts: Vec<f64> = value
                    .split(',')
                    .map(|v| parse_f64(v.trim()))
                    .collect::<Result<_, _>>()?;
                if parts.len() != 3 {
                    return Err(format!(
                        "line {}: harmonic needs amplitude, angular frequency, phase",
                        line_no + 1
                    ));
                }
                spec.harmonics.push(Harmonic {
                    amplitude: parts[0],
                    angular_frequency: parts[1],
                    phase: parts[2],
                });
            }
            "sigma" => spec.noise_sigma = parse_f64(value)?,
            "seed" => {
                spec.seed = value
                    .parse::<u64>()
                    .map_err(|_| format!("line {}: bad seed `{value}`", line_no + 1))?;
            }
            "t_start" => range.t_start = Some(parse_f64(value)?),
            "t_end" => range.t_end = Some(parse_f64(value)?),
            "dt" => range.dt = Some(parse_f64(value)?),
            other => return Err(format!("line {}: unknown key `{other}`", line_no + 1)),
        }
    }
    if spec.noise_sigma < 0.0 {
        return Err("sigma must be nonnegative".to_string());
    }
    Ok((spec, range))
}

/// Comma-separated float list from a flag value.
pub fn parse_float_list(value: &str) -> Result<Vec<f64>, String> {
    value
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad number `{}`", v.trim()))
        })
        .collect()
}

/// `amplitude:angular_frequency:phase` from a flag value.
pub fn parse_harmonic(value: &str) -> Result<Harmonic, String> {
    let parts: Vec<&str> = value.split(':').collect();
    if parts.len() != 3 {
        return Err("harmonic flag needs amplitude:angular_frequency:phase".to_string());
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad number `{}`", v.trim()))
        })
        .collect::<Result<_, _>>()?;
    Ok(Harmonic {
        amplitude: nums[0],
        angular_frequency: nums[1],
        phase: nums[2],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let text = "\
# demo
poly = 5, -0.004, 0.0003, -0.00002, 0.000001
harmonic = 1.0, 0.5, 0.0
harmonic = 2.0, 1.5, 0.25
sigma = 0.7
seed = 42
t_start = 0
t_end = 20000
dt = 1
";
        let (spec, range) = parse_signal_config(text).unwrap();
        assert_eq!(spec.poly.len(), 5);
        assert_eq!(spec.harmonics.len(), 2);
        assert_eq!(spec.noise_sigma, 0.7);
        assert_eq!(spec.seed, 42);
        assert_eq!(range.t_start, Some(0.0));
        assert_eq!(range.t_end, Some(20000.0));
        assert_eq!(range.dt, Some(1.0));
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(parse_signal_config("poly 1,2").is_err());
        assert!(parse_signal_config("poly = a,b").is_err());
        assert!(parse_signal_config("harmonic = 1,2").is_err());
        assert!(parse_signal_config("unknown = 1").is_err());
        assert!(parse_signal_config("sigma = -1").is_err());
    }

    #[test]
    fn flag_helpers() {
        assert_eq!(parse_float_list("1, 2.5,3").unwrap(), vec![1.0, 2.5, 3.0]);
        let h = parse_harmonic("1.5:0.25:0.1").unwrap();
        assert_eq!(h.amplitude, 1.5);
        assert_eq!(h.angular_frequency, 0.25);
        assert_eq!(h.phase, 0.1);
        assert!(parse_harmonic("1:2").is_err());
    }
}
