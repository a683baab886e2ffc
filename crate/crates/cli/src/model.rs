//! Shell-friendly model specs.
//!
//! ```text
//! iid:0.9,0.1
//! maxent:R=0.2            (or maxent:0.2)
//! mix:0.5*iid:0.9,0.1+0.5*iid:0.5,0.5
//! file:path               (SequenceModel JSON, or a spectrum read as an i.i.d. base)
//! {"kind": ...}           (inline SequenceModel JSON)
//! ```

use std::fs;

use locc_core::{Error, Result, SequenceModel, Spectrum};

fn number(text: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("`{text}`: {e}")))
}

fn parse_simple(spec: &str) -> Result<SequenceModel> {
    let (kind, body) = spec
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("model `{spec}` lacks a `kind:` prefix")))?;
    match kind.trim() {
        "iid" => {
            let probs = body.split(',').map(number).collect::<Result<Vec<_>>>()?;
            SequenceModel::iid_from_probs(&probs)
        }
        "maxent" => {
            let body = body.trim();
            let value = body
                .strip_prefix("R=")
                .or_else(|| body.strip_prefix("r="))
                .unwrap_or(body);
            SequenceModel::maxent(number(value)?)
        }
        "file" => from_file(body.trim()),
        other => Err(Error::Parse(format!("unknown model kind `{other}`"))),
    }
}

fn from_file(path: &str) -> Result<SequenceModel> {
    let text = fs::read_to_string(path)?;
    if let Ok(model) = serde_json::from_str::<SequenceModel>(&text) {
        model.validate()?;
        return Ok(model);
    }
    let base = Spectrum::from_json(&text).or_else(|_| Spectrum::from_text(&text))?;
    Ok(SequenceModel::iid(base))
}

pub fn parse_model(spec: &str) -> Result<SequenceModel> {
    let spec = spec.trim();
    if spec.starts_with('{') {
        let model: SequenceModel = serde_json::from_str(spec)?;
        model.validate()?;
        return Ok(model);
    }
    if let Some(body) = spec.strip_prefix("mix:") {
        let mut components = Vec::new();
        for term in body.split('+') {
            let (weight, inner) = term
                .split_once('*')
                .ok_or_else(|| Error::Parse(format!("mixture term `{term}` lacks `weight*`")))?;
            components.push((number(weight)?, parse_simple(inner)?));
        }
        return SequenceModel::mixture(components);
    }
    parse_simple(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar() {
        assert_eq!(
            parse_model("iid:0.9,0.1").unwrap(),
            SequenceModel::iid_from_probs(&[0.9, 0.1]).unwrap()
        );
        assert_eq!(
            parse_model("maxent:R=0.2").unwrap(),
            SequenceModel::maxent(0.2).unwrap()
        );
        assert_eq!(
            parse_model("maxent:0.2").unwrap(),
            SequenceModel::maxent(0.2).unwrap()
        );
        let mix = parse_model("mix:0.5*iid:0.9,0.1+0.5*iid:0.5,0.5").unwrap();
        assert!(matches!(mix, SequenceModel::Mixture { ref components } if components.len() == 2));
        let inline = serde_json::to_string(&mix).unwrap();
        assert_eq!(parse_model(&inline).unwrap(), mix);
    }

    #[test]
    fn rejects_garbage() {
        for bad in [
            "",
            "iid",
            "iid:0.5,x",
            "gauss:1",
            "mix:0.5*iid:1",
            "iid:0.6,0.6",
            "{",
        ] {
            assert!(parse_model(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn spectrum_file_is_iid_base() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.txt");
        fs::write(&path, "0.9 1\n0.1 1\n").unwrap();
        let model = parse_model(&format!("file:{}", path.display())).unwrap();
        assert_eq!(model, SequenceModel::iid_from_probs(&[0.9, 0.1]).unwrap());
    }
}
