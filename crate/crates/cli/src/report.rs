//! Reports in human text and in the machine form `key<TAB>value`.

use std::fmt;

use dpq_core::TruncationBounds;
use sha2::{Digest, Sha256};

/// Conventions that fix every sign in the outputs.
pub const CONVENTIONS: &str = "\
bracket {F,G} = sum F<d/dp_a> d/dx^a G - (-1)^|a| F<d/dx^a> d/dp_a G;\
operators normal-ordered with coordinates left of derivatives in declaration order;\
adjoint int (A s) t = (-1)^{|A||s|} int s (A^+ t);\
Lie derivative L_X = X + 1/2 sum (-1)^{|a|(|X|+1)} d_a X^a;\
hbar of degree 0, [A,B]_hbar = [A,B]/hbar;\
CE field D = rho^a_I eta^I d_a - eps C^j_I eta^I d/deta^j;\
linear structure Pi = rho^a_I p_{xi_I} p_a - C^j_I xi_j p_{xi_I};\
Fourier kernel prod_i (1 + xi_i eta^i / hbar), top eta monomial on the right;\
coboundary solution lexicographically minimal pivot";

/// Stable digest of [`CONVENTIONS`].
pub fn fingerprint() -> String {
    let digest = Sha256::digest(CONVENTIONS.as_bytes());
    let hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
    format!("dpq-conv-1:{hex}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Pass,
    Fail,
    Quantized,
    Obstructed,
    Exhausted,
    Solved,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "OK",
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Quantized => "QUANTIZED",
            Status::Obstructed => "OBSTRUCTED",
            Status::Exhausted => "EXHAUSTED",
            Status::Solved => "SOLVED",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            Status::Ok,
            Status::Pass,
            Status::Fail,
            Status::Quantized,
            Status::Obstructed,
            Status::Exhausted,
            Status::Solved,
        ]
        .into_iter()
        .find(|st| st.as_str() == s)
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok | Status::Pass | Status::Quantized | Status::Solved => 0,
            Status::Fail | Status::Obstructed | Status::Exhausted => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub command: String,
    pub status: Status,
    pub facts: Vec<(String, String)>,
    pub bounds: TruncationBounds,
    pub convention: String,
}

fn none_or(v: Option<u32>) -> String {
    v.map_or_else(|| "none".to_string(), |x| x.to_string())
}

fn bound_facts(b: &TruncationBounds) -> [(&'static str, String); 4] {
    [
        ("bounds.weight_max", b.weight_max.to_string()),
        ("bounds.base_degree_max", b.base_degree_max.to_string()),
        ("bounds.poly_degree_max", none_or(b.poly_degree_max)),
        ("bounds.hbar_max", b.hbar_max.to_string()),
    ]
}

impl Report {
    pub fn new(command: &str, status: Status, bounds: &TruncationBounds) -> Self {
        Report {
            command: command.to_string(),
            status,
            facts: Vec::new(),
            bounds: bounds.clone(),
            convention: fingerprint(),
        }
    }

    /// Values are kept on one line.
    pub fn fact(&mut self, key: impl Into<String>, value: impl fmt::Display) -> &mut Self {
        let v = value.to_string().replace(['\t', '\n'], " ");
        self.facts.push((key.into(), v));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.facts.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn machine(&self) -> String {
        let mut out = format!("command\t{}\nstatus\t{}\n", self.command, self.status.as_str());
        for (k, v) in &self.facts {
            out.push_str(&format!("{k}\t{v}\n"));
        }
        for (k, v) in bound_facts(&self.bounds) {
            out.push_str(&format!("{k}\t{v}\n"));
        }
        out.push_str(&format!("convention\t{}\n", self.convention));
        out
    }

    pub fn text(&self) -> String {
        let mut out = format!("dpq {}: {}\n", self.command, self.status.as_str());
        let width = self.facts.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &self.facts {
            out.push_str(&format!("  {k:<width$}  {v}\n"));
        }
        let b = &self.bounds;
        out.push_str(&format!(
            "bounds: weight_max={} base_degree_max={} poly_degree_max={} hbar_max={}\n",
            b.weight_max,
            b.base_degree_max,
            none_or(b.poly_degree_max),
            b.hbar_max
        ));
        out.push_str(&format!("convention: {}\n", self.convention));
        out
    }

    /// Inverse of [`Report::machine`].
    pub fn parse_machine(text: &str) -> Result<Report, String> {
        let mut lines = text.lines().enumerate().map(|(i, l)| {
            l.split_once('\t')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| format!("line {}: missing tab", i + 1))
        });
        let mut next = |want: &str| -> Result<String, String> {
            match lines.next() {
                Some(Ok((k, v))) if k == want => Ok(v),
                Some(Ok((k, _))) => Err(format!("expected `{want}`, found `{k}`")),
                Some(Err(e)) => Err(e),
                None => Err(format!("missing `{want}`")),
            }
        };
        let command = next("command")?;
        let status = Status::parse(&next("status")?).ok_or("unknown status")?;
        let mut rest: Vec<(String, String)> = Vec::new();
        for l in lines {
            rest.push(l?);
        }
        let Some((k, convention)) = rest.pop() else {
            return Err("missing convention".into());
        };
        if k != "convention" || rest.len() < 4 {
            return Err("missing convention or bounds".into());
        }
        let bound_lines = rest.split_off(rest.len() - 4);
        let nat = |i: usize, key: &str| -> Result<Option<u32>, String> {
            let (k, v) = &bound_lines[i];
            if k != key {
                return Err(format!("expected `{key}`, found `{k}`"));
            }
            if v == "none" {
                return Ok(None);
            }
            v.parse().map(Some).map_err(|_| format!("bad value for `{key}`"))
        };
        let required = |v: Option<u32>, key: &str| v.ok_or_else(|| format!("`{key}` cannot be none"));
        let bounds = TruncationBounds {
            weight_max: required(nat(0, "bounds.weight_max")?, "bounds.weight_max")?,
            base_degree_max: required(nat(1, "bounds.base_degree_max")?, "bounds.base_degree_max")?,
            poly_degree_max: nat(2, "bounds.poly_degree_max")?,
            hbar_max: required(nat(3, "bounds.hbar_max")?, "bounds.hbar_max")?,
        };
        Ok(Report {
            command,
            status,
            facts: rest,
            bounds,
            convention,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn machine_form_round_trips() {
        let mut r = Report::new("quantize", Status::Obstructed, &TruncationBounds::default());
        r.fact("k", 1).fact("cocycle", "1/4 * p[z]");
        let text = r.machine();
        assert!(text.starts_with("command\tquantize\nstatus\tOBSTRUCTED\nk\t1\n"));
        let back = Report::parse_machine(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.machine(), text);
    }

    #[test]
    fn fingerprint_is_stable() {
        assert_eq!(fingerprint(), fingerprint());
        assert!(fingerprint().starts_with("dpq-conv-1:"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Status::Quantized.exit_code(), 0);
        assert_eq!(Status::Obstructed.exit_code(), 1);
        assert_eq!(Status::Fail.exit_code(), 1);
    }
}
