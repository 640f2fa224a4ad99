//! The report object: a version and parameter echo plus one entry per
//! section. Field order is fixed by the struct definitions and all maps are
//! ordered, so identical runs produce byte-identical JSON.

use serde::Serialize;
use serde_json::Value;

#[derive(Serialize)]
pub struct Report {
    pub version: String,
    pub q: u64,
    pub p: u64,
    pub params: ReportParams,
    pub sections: Vec<Section>,
}

#[derive(Serialize)]
pub struct ReportParams {
    pub command: String,
    pub ext: Option<u32>,
    pub max_field_log2: u32,
    pub precision: Option<usize>,
    pub place_bound: Option<u32>,
    pub form_bound: Option<u32>,
}

#[derive(Serialize)]
pub struct Section {
    pub name: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub data: Value,
}

pub enum Status {
    Pass,
    Fail(String),
    Skipped(String),
}

impl Section {
    pub fn new(name: &str, status: Status, data: Value) -> Section {
        let (status, reason) = match status {
            Status::Pass => ("pass".to_string(), None),
            Status::Fail(why) => ("fail".to_string(), Some(why)),
            Status::Skipped(why) => ("skipped".to_string(), Some(why)),
        };
        Section {
            name: name.to_string(),
            status,
            reason,
            data,
        }
    }
}

impl Report {
    pub fn new(ctx: &dlcurve::CurveContext, params: ReportParams) -> Report {
        Report {
            version: env!("CARGO_PKG_VERSION").to_string(),
            q: ctx.q(),
            p: ctx.p(),
            params,
            sections: Vec::new(),
        }
    }

    pub fn push(&mut self, section: Section) {
        self.sections.push(section);
    }

    pub fn all_pass(&self) -> bool {
        self.sections.iter().all(|s| s.status != "fail")
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "dlcurve {} | q = {} (p = {})\n",
            self.version, self.q, self.p
        ));
        for s in &self.sections {
            out.push_str(&format!("{:<14} {}\n", s.name, s.status));
            if let Some(reason) = &s.reason {
                out.push_str(&format!("{:<14}   {}\n", "", reason));
            }
            render_value(&mut out, &s.data, 1);
        }
        let overall = if self.all_pass() { "pass" } else { "FAIL" };
        out.push_str(&format!("overall        {overall}\n"));
        out
    }
}

fn render_value(out: &mut String, v: &Value, depth: usize) {
    let pad = "  ".repeat(depth + 6);
    match v {
        Value::Object(map) => {
            for (k, val) in map {
                match val {
                    Value::Object(_) | Value::Array(_) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render_value(out, val, depth + 1);
                    }
                    _ => out.push_str(&format!("{pad}{k}: {val}\n")),
                }
            }
        }
        Value::Array(items) => {
            if items.iter().all(|i| !i.is_object() && !i.is_array()) {
                let inline: Vec<String> = items.iter().map(|i| i.to_string()).collect();
                out.push_str(&format!("{pad}[{}]\n", inline.join(", ")));
            } else {
                for item in items {
                    render_value(out, item, depth + 1);
                }
            }
        }
        other => out.push_str(&format!("{pad}{other}\n")),
    }
}
