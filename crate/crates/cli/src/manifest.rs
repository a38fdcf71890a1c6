//! Hand-built JSON manifests with stable key order, so identical runs emit
//! identical bytes.

pub struct Manifest {
    body: String,
    first: bool,
}

impl Default for Manifest {
    fn default() -> Self {
        Manifest::new()
    }
}

impl Manifest {
    pub fn new() -> Self {
        Manifest { body: String::from("{"), first: true }
    }

    fn sep(&mut self) {
        if self.first {
            self.first = false;
        } else {
            self.body.push(',');
        }
        self.body.push_str("\n  ");
    }

    pub fn field_str(&mut self, key: &str, value: &str) -> &mut Self {
        self.sep();
        self.body.push_str(&format!("\"{key}\": \"{}\"", escape(value)));
        self
    }

    pub fn field_u64(&mut self, key: &str, value: u64) -> &mut Self {
        self.sep();
        self.body.push_str(&format!("\"{key}\": {value}"));
        self
    }

    pub fn field_f64(&mut self, key: &str, value: f64) -> &mut Self {
        self.sep();
        self.body.push_str(&format!("\"{key}\": {}", json_f64(value)));
        self
    }

    pub fn field_f64_list(&mut self, key: &str, values: &[f64]) -> &mut Self {
        self.sep();
        let parts: Vec<String> = values.iter().map(|v| json_f64(*v)).collect();
        self.body.push_str(&format!("\"{key}\": [{}]", parts.join(", ")));
        self
    }

    pub fn field_str_list(&mut self, key: &str, values: &[String]) -> &mut Self {
        self.sep();
        let parts: Vec<String> = values.iter().map(|v| format!("\"{}\"", escape(v))).collect();
        self.body.push_str(&format!("\"{key}\": [{}]", parts.join(", ")));
        self
    }

    pub fn finish(mut self) -> String {
        self.body.push_str("\n}\n");
        self.body
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

fn json_f64(v: f64) -> String {
    if v.is_finite() {
        idslab_core::spectral::fmt_f64(v)
    } else {
        "null".into()
    }
}

/// FNV-1a fingerprint of the configuration text.
pub fn config_hash(text: &str) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

/// Extract the embedded config text from a manifest produced by this tool,
/// for reproducing a run from its manifest alone.
pub fn embedded_config(manifest: &str) -> Option<String> {
    let key = "\"config_text\": \"";
    let start = manifest.find(key)? + key.len();
    let rest = &manifest[start..];
    let mut out = String::new();
    let mut chars = rest.chars();
    while let Some(c) = chars.next() {
        match c {
            '"' => return Some(out),
            '\\' => match chars.next()? {
                'n' => out.push('\n'),
                'r' => out.push('\r'),
                't' => out.push('\t'),
                '"' => out.push('"'),
                '\\' => out.push('\\'),
                'u' => {
                    let hex: String = (0..4).filter_map(|_| chars.next()).collect();
                    let code = u32::from_str_radix(&hex, 16).ok()?;
                    out.push(char::from_u32(code)?);
                }
                other => out.push(other),
            },
            c => out.push(c),
        }
    }
    None
}
