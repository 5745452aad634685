//! Report assembly: one in-memory structure rendered as CSV (metadata in
//! `#`-prefixed lines ahead of the data section) or as a JSON document.
//! Both renderings are byte-deterministic for a fixed configuration; the
//! only time-dependent field is the optional `generated_unix` stamp.

use serde_json::{json, Map, Value};

pub struct Report {
    pub command: &'static str,
    /// Echo of the effective configuration, one scalar per flag.
    pub config: Value,
    /// Derived summary quantities, in print order.
    pub summary: Vec<(&'static str, Value)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    pub stamp: Option<u64>,
}

impl Report {
    pub fn to_csv(&self) -> Vec<u8> {
        let mut head = String::new();
        head.push_str(&format!("# command,{}\n", self.command));
        if let Value::Object(map) = &self.config {
            for (key, value) in map {
                head.push_str(&format!("# {key},{}\n", scalar(value)));
            }
        }
        for (key, value) in &self.summary {
            head.push_str(&format!("# {key},{}\n", scalar(value)));
        }
        if let Some(ts) = self.stamp {
            head.push_str(&format!("# generated_unix,{ts}\n"));
        }
        let mut writer = csv::Writer::from_writer(head.into_bytes());
        writer
            .write_record(&self.columns)
            .expect("in-memory csv write cannot fail");
        for row in &self.rows {
            writer
                .write_record(row.iter().map(scalar))
                .expect("in-memory csv write cannot fail");
        }
        writer.into_inner().expect("in-memory csv flush cannot fail")
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut root = Map::new();
        root.insert("command".into(), json!(self.command));
        root.insert("config".into(), self.config.clone());
        if let Some(ts) = self.stamp {
            root.insert("generated_unix".into(), json!(ts));
        }
        if !self.summary.is_empty() {
            let mut summary = Map::new();
            for (key, value) in &self.summary {
                summary.insert((*key).into(), value.clone());
            }
            root.insert("summary".into(), Value::Object(summary));
        }
        root.insert("columns".into(), json!(self.columns));
        root.insert("rows".into(), json!(self.rows));
        let mut bytes =
            serde_json::to_vec_pretty(&Value::Object(root)).expect("report is serializable");
        bytes.push(b'\n');
        bytes
    }
}

fn scalar(value: &Value) -> String {
    match value {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
