use svg::node::element::{Circle, Group, Line, Polygon, Rectangle, Text};
use svg::Document;

use super::json::GlobalMapReport;
use crate::calibration::EstimateMode;
use crate::explainer::Prediction;
use crate::triage::{feasible, rank_score, Category, RankingWeight, TriagedRule};

/// Cells per axis in the ranking heatmap.
pub const HEATMAP_CELLS: usize = 50;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const FEASIBLE_FILL: &str = "#f2f2f2";
const ORIGINAL_BAND: &str = "#fde0e0";
const VIRIDIS: [(u8, u8, u8); 5] = [
    (0x44, 0x01, 0x54),
    (0x3b, 0x52, 0x8b),
    (0x21, 0x91, 0x8c),
    (0x5e, 0xc9, 0x62),
    (0xfd, 0xe7, 0x25),
];

/// Red for counter, yellow for semi, green for super; the lighter shade
/// marks potential rules.
pub fn category_colour(category: Category) -> &'static str {
    match category {
        Category::CounterFactual => "#d62728",
        Category::CounterPotential => "#f4a6a6",
        Category::SemiFactual => "#e6b800",
        Category::SemiPotential => "#fbe79a",
        Category::SuperFactual => "#2ca02c",
        Category::SuperPotential => "#a8dba8",
    }
}

fn round(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Plot area inside the document and the data ranges it shows.
struct Frame {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn unit(doc_width: f64, doc_height: f64, left: f64) -> Self {
        Self {
            left,
            top: 40.0,
            width: doc_width - left - 30.0,
            height: doc_height - 100.0,
            x: (0.0, 1.0),
            y: (0.0, 1.0),
        }
    }

    fn px(&self, x: f64) -> f64 {
        round(self.left + (x - self.x.0) / (self.x.1 - self.x.0) * self.width)
    }

    fn py(&self, y: f64) -> f64 {
        round(self.top + self.height - (y - self.y.0) / (self.y.1 - self.y.0) * self.height)
    }

    fn axes(&self, title: &str, x_label: &str, y_label: Option<&str>) -> Group {
        let bottom = self.top + self.height;
        let mut g = Group::new().set("font-family", "sans-serif").set("font-size", 12);
        g = g.add(line(self.left, bottom, self.left + self.width, bottom, "#000"));
        if y_label.is_some() {
            g = g.add(line(self.left, self.top, self.left, bottom, "#000"));
        }
        for k in 0..=4 {
            let t = k as f64 / 4.0;
            let xv = self.x.0 + t * (self.x.1 - self.x.0);
            let x = self.px(xv);
            g = g.add(line(x, bottom, x, bottom + 5.0, "#000")).add(
                Text::new(format!("{xv:.2}"))
                    .set("x", x)
                    .set("y", bottom + 18.0)
                    .set("text-anchor", "middle"),
            );
            if y_label.is_some() {
                let yv = self.y.0 + t * (self.y.1 - self.y.0);
                let y = self.py(yv);
                g = g.add(line(self.left - 5.0, y, self.left, y, "#000")).add(
                    Text::new(format!("{yv:.2}"))
                        .set("x", self.left - 8.0)
                        .set("y", y + 4.0)
                        .set("text-anchor", "end"),
                );
            }
        }
        g = g
            .add(
                Text::new(x_label)
                    .set("x", round(self.left + self.width / 2.0))
                    .set("y", bottom + 40.0)
                    .set("text-anchor", "middle"),
            )
            .add(
                Text::new(title)
                    .set("x", round(self.left + self.width / 2.0))
                    .set("y", 22)
                    .set("text-anchor", "middle")
                    .set("font-size", 15),
            );
        if let Some(label) = y_label {
            let (x, y) = (round(self.left - 45.0), round(self.top + self.height / 2.0));
            g = g.add(
                Text::new(label)
                    .set("x", x)
                    .set("y", y)
                    .set("text-anchor", "middle")
                    .set("transform", format!("rotate(-90 {x} {y})")),
            );
        }
        g
    }

    /// Shaded region of reachable (probability, uncertainty) pairs for
    /// regularised estimates.
    fn feasible_region(&self) -> Polygon {
        let steps = 100;
        let mut pts = Vec::with_capacity(2 * steps + 2);
        for i in 0..=steps {
            let u = i as f64 / steps as f64;
            pts.push((u / (1.0 + u), u));
        }
        for i in (0..=steps).rev() {
            let u = i as f64 / steps as f64;
            pts.push((1.0 / (1.0 + u), u));
        }
        let points: Vec<String> = pts
            .iter()
            .map(|&(p, u)| format!("{},{}", self.px(p), self.py(u)))
            .collect();
        Polygon::new()
            .set("points", points.join(" "))
            .set("fill", FEASIBLE_FILL)
            .set("stroke", "#999")
    }
}

fn line(x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str) -> Line {
    Line::new()
        .set("x1", round(x1))
        .set("y1", round(y1))
        .set("x2", round(x2))
        .set("y2", round(y2))
        .set("stroke", stroke)
}

fn document(width: f64, height: f64) -> Document {
    Document::new()
        .set("width", width)
        .set("height", height)
        .set("viewBox", (0, 0, width, height))
        .add(Rectangle::new().set("width", width).set("height", height).set("fill", "white"))
}

fn square(x: f64, y: f64, size: f64, fill: &str) -> Rectangle {
    Rectangle::new()
        .set("x", round(x - size / 2.0))
        .set("y", round(y - size / 2.0))
        .set("width", size)
        .set("height", size)
        .set("fill", fill)
}

fn legend(items: &[(&str, &str)], x: f64, y: f64) -> Group {
    let mut g = Group::new().set("font-family", "sans-serif").set("font-size", 11);
    for (i, (label, colour)) in items.iter().enumerate() {
        let yy = y + 16.0 * i as f64;
        g = g
            .add(square(x, yy, 9.0, colour))
            .add(Text::new(*label).set("x", x + 9.0).set("y", yy + 4.0));
    }
    g
}

/// Test-set scatter of probability against uncertainty, one marker shape
/// per predicted class, over the feasible region.
pub fn global_map_svg(report: &GlobalMapReport) -> Document {
    let f = Frame::unit(WIDTH, HEIGHT, 70.0);
    let mut doc = document(WIDTH, HEIGHT)
        .add(f.feasible_region())
        .add(f.axes("Calibrated predictions", "probability", Some("uncertainty")));
    let mut points = Group::new().set("fill-opacity", 0.7);
    for p in &report.points {
        let (x, y) = (f.px(p.probability), f.py(p.uncertainty));
        if p.predicted_class == report.class_labels[1] {
            points = points.add(Circle::new().set("cx", x).set("cy", y).set("r", 3.5).set("fill", "#1f77b4"));
        } else {
            points = points.add(square(x, y, 6.0, "#ff7f0e"));
        }
    }
    doc = doc.add(points).add(legend(
        &[
            (report.class_labels[1].as_str(), "#1f77b4"),
            (report.class_labels[0].as_str(), "#ff7f0e"),
        ],
        f.left + 12.0,
        f.top + 10.0,
    ));
    doc
}

/// All alternative rules of one instance, with the selected ones drawn
/// large and coloured by category and the original prediction as a black
/// diamond.
pub fn rank_scatter_svg(original: Prediction, rules: &[TriagedRule], selected: &[TriagedRule], title: &str) -> Document {
    let f = Frame::unit(WIDTH, HEIGHT, 70.0);
    let mut doc = document(WIDTH, HEIGHT)
        .add(f.feasible_region())
        .add(line(f.px(0.5), f.py(0.0), f.px(0.5), f.py(1.0), "#bbb").set("stroke-dasharray", "4 3"))
        .add(f.axes(title, "probability", Some("uncertainty")));
    let chosen: Vec<usize> = selected.iter().map(|r| r.index).collect();
    let mut all = Group::new();
    let mut top = Group::new().set("stroke", "#000").set("stroke-width", 0.8);
    for r in rules {
        let (x, y) = (f.px(r.rule.estimate), f.py(r.uncertainty));
        let c = category_colour(r.category);
        if chosen.contains(&r.index) {
            top = top.add(Circle::new().set("cx", x).set("cy", y).set("r", 6).set("fill", c));
        } else {
            all = all.add(
                Circle::new()
                    .set("cx", x)
                    .set("cy", y)
                    .set("r", 3)
                    .set("fill", c)
                    .set("fill-opacity", 0.5),
            );
        }
    }
    let (ox, oy) = (f.px(original.estimate), f.py(original.uncertainty()));
    let diamond = Polygon::new()
        .set(
            "points",
            format!("{},{} {},{} {},{} {},{}", ox, oy - 8.0, ox + 8.0, oy, ox, oy + 8.0, ox - 8.0, oy),
        )
        .set("fill", "#000");
    let items: Vec<(&str, &str)> = Category::ALL
        .iter()
        .map(|&c| (c.short_name(), category_colour(c)))
        .collect();
    doc = doc
        .add(all)
        .add(top)
        .add(diamond)
        .add(legend(&items, f.left + f.width - 60.0, f.top + 10.0));
    doc
}

/// One row per selected rule: its condition, its interval as a bar and its
/// estimate as a tick, over a band showing the original interval.
pub fn bars_svg(original: Prediction, rows: &[(String, TriagedRule)], title: &str) -> Document {
    let row_h = 26.0;
    let height = 110.0 + row_h * rows.len().max(1) as f64;
    let mut f = Frame::unit(WIDTH + 200.0, height, 330.0);
    f.height = row_h * rows.len().max(1) as f64;
    let bottom = f.top + f.height;
    let band = Rectangle::new()
        .set("x", f.px(original.low))
        .set("y", f.top)
        .set("width", round(f.px(original.high) - f.px(original.low)))
        .set("height", f.height)
        .set("fill", ORIGINAL_BAND);
    let mut doc = document(WIDTH + 200.0, height)
        .add(band)
        .add(line(f.px(original.estimate), f.top, f.px(original.estimate), bottom, "#d62728"))
        .add(f.axes(title, "probability", None));
    let mut g = Group::new().set("font-family", "sans-serif").set("font-size", 12);
    for (i, (label, r)) in rows.iter().enumerate() {
        let y = f.top + row_h * i as f64;
        let x0 = f.px(r.rule.low);
        g = g
            .add(
                Text::new(label.as_str())
                    .set("x", f.left - 10.0)
                    .set("y", round(y + row_h / 2.0 + 4.0))
                    .set("text-anchor", "end"),
            )
            .add(
                Rectangle::new()
                    .set("x", x0)
                    .set("y", round(y + 5.0))
                    .set("width", round((f.px(r.rule.high) - x0).max(1.0)))
                    .set("height", row_h - 10.0)
                    .set("fill", category_colour(r.category)),
            )
            .add(line(
                f.px(r.rule.estimate),
                y + 3.0,
                f.px(r.rule.estimate),
                y + row_h - 3.0,
                "#000",
            ));
    }
    doc = doc.add(g);
    doc
}

/// Rank scores on a `cells x cells` grid of cell centres, indexed
/// `[uncertainty][probability]`, min-max normalised over feasible cells.
/// Infeasible cells are `None`.
pub fn heatmap_values(w: RankingWeight, cells: usize) -> Vec<Vec<Option<f64>>> {
    let centre = |i: usize| (i as f64 + 0.5) / cells as f64;
    let raw: Vec<Vec<Option<f64>>> = (0..cells)
        .map(|ui| {
            (0..cells)
                .map(|pi| {
                    let (p, u) = (centre(pi), centre(ui));
                    feasible(p, u, EstimateMode::Regularised).then(|| rank_score(p, u, w))
                })
                .collect()
        })
        .collect();
    let values = raw.iter().flatten().flatten().copied();
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    raw.into_iter()
        .map(|row| row.into_iter().map(|v| v.map(|v| (v - lo) / span)).collect())
        .collect()
}

fn viridis(t: f64) -> String {
    let t = t.clamp(0.0, 1.0) * (VIRIDIS.len() - 1) as f64;
    let i = (t.floor() as usize).min(VIRIDIS.len() - 2);
    let frac = t - i as f64;
    let mix = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * frac).round() as u8;
    let (a, b) = (VIRIDIS[i], VIRIDIS[i + 1]);
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Rank scores over the feasible (probability, uncertainty) region: yellow
/// ranks high, dark blue ranks low.
pub fn heatmap_svg(w: RankingWeight) -> Document {
    let f = Frame::unit(WIDTH, HEIGHT, 70.0);
    let cells = HEATMAP_CELLS;
    let values = heatmap_values(w, cells);
    let cw = f.width / cells as f64;
    let ch = f.height / cells as f64;
    let mut grid = Group::new().set("shape-rendering", "crispEdges");
    for (ui, row) in values.iter().enumerate() {
        for (pi, v) in row.iter().enumerate() {
            if let Some(v) = v {
                grid = grid.add(
                    Rectangle::new()
                        .set("x", round(f.left + pi as f64 * cw))
                        .set("y", round(f.top + f.height - (ui + 1) as f64 * ch))
                        .set("width", round(cw + 0.3))
                        .set("height", round(ch + 0.3))
                        .set("fill", viridis(*v)),
                );
            }
        }
    }
    document(WIDTH, HEIGHT)
        .add(grid)
        .add(f.axes(&format!("Ranking with w = {}", w.value()), "probability of the predicted class", Some("uncertainty")))
}
