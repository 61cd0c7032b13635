//! Output writers: CSV tables and SVG figures, every file prefixed with a
//! header recording the config hash, seed and tool version. Files are
//! written to a temporary sibling and renamed into place.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use nalgebra::DVector;

use crate::domain::ConvexDomain;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone)]
pub struct RunMetadata {
    pub config_hash: u64,
    pub seed: u64,
}

impl RunMetadata {
    fn comment_line(&self) -> String {
        format!(
            "config_hash={:016x} seed={} version={}",
            self.config_hash, self.seed, VERSION
        )
    }
}

pub struct OutputWriter {
    dir: PathBuf,
    meta: RunMetadata,
}

impl OutputWriter {
    pub fn new(dir: &Path, meta: RunMetadata) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            meta,
        })
    }

    fn write_atomic(&self, name: &str, content: &str) -> io::Result<PathBuf> {
        let target = self.dir.join(name);
        let tmp = self.dir.join(format!(".{name}.tmp"));
        fs::write(&tmp, content)?;
        fs::rename(&tmp, &target)?;
        Ok(target)
    }

    /// CSV with '#'-prefixed metadata, a header row, then the data rows.
    pub fn write_csv(
        &self,
        name: &str,
        columns: &[&str],
        rows: &[Vec<f64>],
    ) -> io::Result<PathBuf> {
        let mut out = format!("# {}\n", self.meta.comment_line());
        out.push_str(&columns.join(","));
        out.push('\n');
        for row in rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        self.write_atomic(name, &out)
    }

    /// CSV from pre-rendered lines (header row included by the caller).
    pub fn write_csv_text(&self, name: &str, body: &str) -> io::Result<PathBuf> {
        let out = format!("# {}\n{body}", self.meta.comment_line());
        self.write_atomic(name, &out)
    }

    pub fn write_svg(&self, name: &str, svg_body: &str) -> io::Result<PathBuf> {
        let out = format!("<!-- {} -->\n{svg_body}", self.meta.comment_line());
        self.write_atomic(name, &out)
    }
}

/// Minimal SVG scene builder on a 1000×1000 viewbox.
pub struct Svg {
    elements: Vec<String>,
}

impl Svg {
    pub fn new() -> Self {
        Self {
            elements: Vec::new(),
        }
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64, close: bool) {
        let mut path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        if close {
            if let Some(first) = path.first().cloned() {
                path.push(first);
            }
        }
        self.elements.push(format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{width}\"/>",
            path.join(" ")
        ));
    }

    pub fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        self.elements.push(format!(
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r}\" fill=\"{fill}\"/>"
        ));
    }

    pub fn text(&mut self, x: f64, y: f64, size: u32, content: &str) {
        self.elements.push(format!(
            "<text x=\"{x:.1}\" y=\"{y:.1}\" font-size=\"{size}\" font-family=\"monospace\">{content}</text>"
        ));
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1000 1000\">\n{}\n</svg>\n",
            self.elements.join("\n")
        )
    }
}

impl Default for Svg {
    fn default() -> Self {
        Self::new()
    }
}

/// Scene with the domain boundary normalized to the viewbox, plus optional
/// overlay paths in the same coordinates.
pub fn domain_scene(domain: &ConvexDomain, overlays: &[Vec<DVector<f64>>]) -> String {
    let base = domain.base_point();
    let mut boundary: Vec<DVector<f64>> = Vec::new();
    if domain.dim() == 2 {
        for k in 0..512 {
            let th = k as f64 / 512.0 * std::f64::consts::TAU;
            let dir = DVector::from_column_slice(&[th.cos(), th.sin()]);
            if let Ok(chord) = domain.chord(base, &dir) {
                boundary.push(chord.xplus);
            }
        }
    }
    // Bounding box across boundary and overlays.
    let mut min = [f64::INFINITY; 2];
    let mut max = [f64::NEG_INFINITY; 2];
    for p in boundary.iter().chain(overlays.iter().flatten()) {
        for i in 0..2 {
            min[i] = min[i].min(p[i]);
            max[i] = max[i].max(p[i]);
        }
    }
    let span = ((max[0] - min[0]).max(max[1] - min[1])).max(1e-9);
    let map = |p: &DVector<f64>| -> (f64, f64) {
        (
            60.0 + 880.0 * (p[0] - min[0]) / span,
            940.0 - 880.0 * (p[1] - min[1]) / span,
        )
    };
    let mut svg = Svg::new();
    let pts: Vec<(f64, f64)> = boundary.iter().map(&map).collect();
    svg.polyline(&pts, "black", 2.0, true);
    for overlay in overlays {
        let pts: Vec<(f64, f64)> = overlay.iter().map(&map).collect();
        svg.polyline(&pts, "crimson", 2.0, false);
    }
    svg.finish()
}

/// Log-scale fit figure: data points plus the fitted line, with slope label.
pub fn fit_plot(points: &[(f64, f64)], slope: f64, intercept: f64, label: &str) -> String {
    let mut min = [f64::INFINITY; 2];
    let mut max = [f64::NEG_INFINITY; 2];
    for &(x, y) in points {
        min[0] = min[0].min(x);
        max[0] = max[0].max(x);
        min[1] = min[1].min(y);
        max[1] = max[1].max(y);
    }
    let spanx = (max[0] - min[0]).max(1e-9);
    let spany = (max[1] - min[1]).max(1e-9);
    let map = |x: f64, y: f64| -> (f64, f64) {
        (
            80.0 + 840.0 * (x - min[0]) / spanx,
            920.0 - 840.0 * (y - min[1]) / spany,
        )
    };
    let mut svg = Svg::new();
    svg.polyline(
        &[(80.0, 80.0), (80.0, 920.0), (920.0, 920.0)],
        "gray",
        1.0,
        false,
    );
    for &(x, y) in points {
        let (px, py) = map(x, y);
        svg.circle(px, py, 4.0, "steelblue");
    }
    let line: Vec<(f64, f64)> = [min[0], max[0]]
        .iter()
        .map(|&x| map(x, slope * x + intercept))
        .collect();
    svg.polyline(&line, "crimson", 1.5, false);
    svg.text(100.0, 60.0, 24, &format!("{label}: slope {slope:.6}"));
    svg.finish()
}
