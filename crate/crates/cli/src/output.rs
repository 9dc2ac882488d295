use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// One flat record; keys keep their insertion order.
#[derive(Default)]
pub struct Record(Vec<(&'static str, Value)>);

impl Record {
    pub fn new() -> Self {
        Record(Vec::new())
    }

    pub fn num(mut self, key: &'static str, v: f64) -> Self {
        let val = serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number);
        self.0.push((key, val));
        self
    }

    pub fn int(mut self, key: &'static str, v: u64) -> Self {
        self.0.push((key, Value::from(v)));
        self
    }

    pub fn text(mut self, key: &'static str, v: impl Into<String>) -> Self {
        self.0.push((key, Value::String(v.into())));
        self
    }

    fn csv_cell(v: &Value) -> String {
        match v {
            Value::String(s) => s.clone(),
            Value::Null => "inf".into(),
            other => other.to_string(),
        }
    }

    fn json(&self) -> String {
        let body: Vec<String> = self.0.iter().map(|(k, v)| format!("{}:{}", Value::from(*k), v)).collect();
        format!("{{{}}}", body.join(","))
    }
}

/// Renders records that share one set of keys.
pub fn render(records: &[Record], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut out = String::new();
            if let Some(first) = records.first() {
                let keys: Vec<&str> = first.0.iter().map(|(k, _)| *k).collect();
                out.push_str(&keys.join(","));
                out.push('\n');
            }
            for r in records {
                let cells: Vec<String> = r.0.iter().map(|(_, v)| Record::csv_cell(v)).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            out
        }
        Format::Json if records.len() == 1 => format!("{}\n", records[0].json()),
        Format::Json => {
            let rows: Vec<String> = records.iter().map(Record::json).collect();
            format!("[{}]\n", rows.join(",\n"))
        }
    }
}
