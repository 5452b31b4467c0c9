use serde::{Deserialize, Serialize};

use super::{to_json, Format};
use crate::project::Project;
use crate::requirements::{ArtifactRef, LinkType};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixRow {
    pub source: ArtifactRef,
    /// One cell per column, targets in link declaration order.
    pub cells: Vec<Vec<ArtifactRef>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceMatrix {
    pub columns: Vec<LinkType>,
    pub rows: Vec<MatrixRow>,
}

impl TraceMatrix {
    pub fn link_count(&self) -> usize {
        self.rows.iter().flat_map(|r| &r.cells).map(Vec::len).sum()
    }

    pub fn row(&self, source: &ArtifactRef) -> Option<&MatrixRow> {
        self.rows.iter().find(|r| &r.source == source)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        let mut header = vec!["source".to_string()];
        header.extend(self.columns.iter().map(|c| c.to_string()));
        w.write_record(&header).expect("in-memory write");
        for r in &self.rows {
            let mut rec = vec![r.source.to_string()];
            rec.extend(r.cells.iter().map(|c| c.iter().map(|a| a.to_string()).collect::<Vec<_>>().join("; ")));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => to_json(self),
            Format::Text => self.to_csv(),
        }
    }
}

/// Rows are all requirements in declaration order, then any other link
/// source (functions with allocations, for instance) in first-use order.
pub fn trace_matrix(project: &Project) -> TraceMatrix {
    let columns = LinkType::ALL.to_vec();
    let mut rows: Vec<MatrixRow> = project
        .requirements
        .iter()
        .map(|r| MatrixRow {
            source: ArtifactRef::req(r.id.clone()),
            cells: vec![Vec::new(); columns.len()],
        })
        .collect();
    for l in &project.links {
        let i = match rows.iter().position(|r| r.source == l.source) {
            Some(i) => i,
            None => {
                rows.push(MatrixRow {
                    source: l.source.clone(),
                    cells: vec![Vec::new(); columns.len()],
                });
                rows.len() - 1
            }
        };
        let col = columns.iter().position(|c| *c == l.link_type).expect("all link types are columns");
        rows[i].cells[col].push(l.target.clone());
    }
    TraceMatrix { columns, rows }
}
