use std::f64::consts::PI;
use std::fmt::Write as _;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Phase in units of `2π/3`.
pub fn in_two_pi_over_three(phi: f64) -> f64 {
    phi / (2.0 * PI / 3.0)
}

/// CSV text with a `# `-prefixed header block.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(command: &str, config: &[(String, String)], columns: &[String]) -> Self {
        let mut text = String::new();
        for line in header_lines(command, config) {
            let _ = writeln!(text, "# {line}");
        }
        let _ = writeln!(text, "{}", columns.join(","));
        Csv { text }
    }

    pub fn row(&mut self, cells: &[String]) {
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn header_lines(command: &str, config: &[(String, String)]) -> Vec<String> {
    let mut lines = vec![
        format!("ringcat {}", env!("CARGO_PKG_VERSION")),
        format!("command = {command}"),
    ];
    lines.extend(config.iter().map(|(k, v)| format!("{k} = {v}")));
    lines
}
