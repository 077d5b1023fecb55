//! CSV and JSON encoding. CSV numbers carry 17 significant digits; JSON
//! infinities become `{"infinite": true}`.

use flatzone_core::Extended;
use serde_json::{json, Map, Value};

pub const VERSION: &str = concat!("flatzone ", env!("CARGO_PKG_VERSION"));

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn jnum(x: f64) -> Value {
    if x.is_nan() {
        Value::Null
    } else if x == f64::INFINITY {
        json!({"infinite": true})
    } else if x == f64::NEG_INFINITY {
        json!({"infinite": true, "negative": true})
    } else {
        json!(x)
    }
}

pub fn jext(x: Extended) -> Value {
    jnum(x.to_f64())
}

pub fn jopt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, jnum)
}

/// A CSV block: `#` comment lines with version and config, then the
/// header and the rows.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
    prefix: String,
}

impl Table {
    pub fn new(config: &Value, header: &[&str]) -> Self {
        let prefix = format!("# {VERSION}\n# config {config}\n");
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Table { writer, prefix }
    }

    /// A further block in the same file: header and rows only.
    pub fn bare(header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Table { writer, prefix: String::new() }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.writer.write_record(fields).expect("in-memory write");
    }

    pub fn finish(self) -> String {
        let body = self.writer.into_inner().expect("in-memory flush");
        self.prefix + &String::from_utf8(body).expect("csv output is utf-8")
    }
}

/// Wrap a report body with the version string and the config echo.
pub fn report(config: &Value, body: Map<String, Value>) -> Value {
    let mut m = Map::new();
    m.insert("version".into(), json!(VERSION));
    m.insert("config".into(), config.clone());
    m.extend(body);
    Value::Object(m)
}
