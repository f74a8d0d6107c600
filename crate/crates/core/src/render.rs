//! SVG pictures of scenes, graphs and paths.

use std::fmt::Write;
use std::str::FromStr;

use crate::cutline::{CutAxis, CutLineTree};
use crate::gateway::GatewaySet;
use crate::geom::RPoint;
use crate::io::AnyIndex;
use crate::scene::Scene;

const SIZE: f64 = 1000.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Layer {
    Obstacles,
    Cutlines,
    SteinerPoints,
    Gateways,
    Path,
    HananGrid,
}

impl FromStr for Layer {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "obstacles" => Ok(Layer::Obstacles),
            "cutlines" | "cut_lines" => Ok(Layer::Cutlines),
            "steiner_points" | "steiner" => Ok(Layer::SteinerPoints),
            "gateways" => Ok(Layer::Gateways),
            "path" => Ok(Layer::Path),
            "hanan_grid" | "grid" => Ok(Layer::HananGrid),
            other => Err(format!("unknown layer {other:?}")),
        }
    }
}

/// Parses a comma-separated layer list.
pub fn parse_layers(list: &str) -> Result<Vec<Layer>, String> {
    let mut out: Vec<Layer> =
        list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect::<Result<_, _>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

/// Everything that can be drawn on top of a scene.
#[derive(Clone, Debug, Default)]
pub struct Overlay {
    pub cutlines: Vec<(CutAxis, i64)>,
    pub steiner: Vec<RPoint>,
    pub gateways: Vec<GatewaySet>,
    pub path: Option<Vec<RPoint>>,
}

impl Overlay {
    /// Cut-lines and graph nodes of a built index.
    pub fn from_index(index: &AnyIndex) -> Self {
        let trees: Vec<&CutLineTree> = match index {
            AnyIndex::Polygonal(i) => i.tree.iter().collect(),
            AnyIndex::Weighted(i) => i.wg.vtree.iter().chain(i.wg.htree.iter()).collect(),
        };
        let cutlines = trees.iter().flat_map(|t| t.nodes.iter().map(|n| (t.axis, n.cut))).collect();
        let steiner = index.graph().nodes.iter().map(|n| n.location.clone()).collect();
        Overlay { cutlines, steiner, ..Default::default() }
    }
}

struct Frame {
    x0: f64,
    y1: f64,
    scale: f64,
}

impl Frame {
    fn new(scene: &Scene) -> Self {
        let b = scene.bbox;
        let span = ((b.x1 - b.x0).max(b.y1 - b.y0)).max(1) as f64;
        Frame { x0: b.x0 as f64, y1: b.y1 as f64, scale: SIZE / span }
    }

    fn x(&self, v: f64) -> f64 {
        (v - self.x0) * self.scale
    }

    fn y(&self, v: f64) -> f64 {
        (self.y1 - v) * self.scale
    }

    fn point(&self, p: &RPoint) -> String {
        format!("{:.3},{:.3}", self.x(p.x.to_f64()), self.y(p.y.to_f64()))
    }

    fn points(&self, ps: &[RPoint]) -> String {
        ps.iter().map(|p| self.point(p)).collect::<Vec<_>>().join(" ")
    }
}

fn line(out: &mut String, f: &Frame, a: (f64, f64), b: (f64, f64), class: &str) {
    let _ = writeln!(
        out,
        r#"<line class="{class}" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
        f.x(a.0),
        f.y(a.1),
        f.x(b.0),
        f.y(b.1)
    );
}

fn full_line(out: &mut String, f: &Frame, scene: &Scene, axis: CutAxis, c: i64, class: &str) {
    let b = scene.bbox;
    let c = c as f64;
    match axis {
        CutAxis::Vertical => line(out, f, (c, b.y0 as f64), (c, b.y1 as f64), class),
        CutAxis::Horizontal => line(out, f, (b.x0 as f64, c), (b.x1 as f64, c), class),
    }
}

/// Renders the requested layers. Output depends only on the inputs.
pub fn render_svg(scene: &Scene, overlay: &Overlay, layers: &[Layer]) -> String {
    let f = Frame::new(scene);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {SIZE} {SIZE}" width="{SIZE}" height="{SIZE}">"#
    );
    out.push_str(
        "<style>\
         .obstacle{fill:#c9ced6;stroke:#3b4252;stroke-width:1.5}\
         .cutline{stroke:#5e81ac;stroke-width:0.8;stroke-dasharray:6 4}\
         .grid{stroke:#d8dee9;stroke-width:0.5}\
         .steiner{fill:#bf616a}\
         .gateway{fill:none;stroke:#a3be8c;stroke-width:1.2}\
         .path{fill:none;stroke:#d08770;stroke-width:2.5}\
         </style>\n",
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{:.3}" height="{:.3}" fill="white" stroke="black"/>"#,
        f.x(scene.bbox.x1 as f64),
        f.y(scene.bbox.y0 as f64)
    );
    for layer in layers {
        match layer {
            Layer::HananGrid => {
                let mut xs: Vec<i64> = scene.vertices().map(|v| v.x).collect();
                let mut ys: Vec<i64> = scene.vertices().map(|v| v.y).collect();
                xs.sort_unstable();
                xs.dedup();
                ys.sort_unstable();
                ys.dedup();
                for x in xs {
                    full_line(&mut out, &f, scene, CutAxis::Vertical, x, "grid");
                }
                for y in ys {
                    full_line(&mut out, &f, scene, CutAxis::Horizontal, y, "grid");
                }
            }
            Layer::Obstacles => {
                for poly in &scene.obstacles {
                    let pts: Vec<RPoint> = poly.vertices.iter().map(|&v| v.into()).collect();
                    let _ = writeln!(out, r#"<polygon class="obstacle" points="{}"/>"#, f.points(&pts));
                }
            }
            Layer::Cutlines => {
                for &(axis, c) in &overlay.cutlines {
                    full_line(&mut out, &f, scene, axis, c, "cutline");
                }
            }
            Layer::SteinerPoints => {
                for p in &overlay.steiner {
                    let _ = writeln!(
                        out,
                        r#"<circle class="steiner" cx="{:.3}" cy="{:.3}" r="2.5"/>"#,
                        f.x(p.x.to_f64()),
                        f.y(p.y.to_f64())
                    );
                }
            }
            Layer::Gateways => {
                for g in overlay.gateways.iter().flat_map(|s| s.entries()) {
                    let _ = writeln!(out, r#"<polyline class="gateway" points="{}"/>"#, f.points(&g.polyline));
                }
            }
            Layer::Path => {
                if let Some(path) = &overlay.path {
                    let _ = writeln!(out, r#"<polyline class="path" points="{}"/>"#, f.points(path));
                }
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::GraphMode;
    use crate::geom::Point;
    use crate::query::ApspPolicy;
    use crate::scene::fixtures::{scene_a, scene_w};

    #[test]
    fn obstacles_and_path() {
        let scene = scene_a();
        let idx = AnyIndex::build(&scene, GraphMode::GEnhanced, ApspPolicy::OnDemand, &Default::default()).unwrap();
        let r = idx.query(Point::new(0, 3), Point::new(6, 3), true).unwrap();
        let overlay = Overlay { path: Some(r.path), ..Default::default() };
        let svg = render_svg(&scene, &overlay, &parse_layers("obstacles,path").unwrap());
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polygon").count(), 1);
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert_eq!(svg, render_svg(&scene, &overlay, &parse_layers("path,obstacles").unwrap()));
    }

    #[test]
    fn index_layers() {
        let scene = scene_w();
        let idx = AnyIndex::build(&scene, GraphMode::GEnhanced, ApspPolicy::OnDemand, &Default::default()).unwrap();
        let overlay = Overlay::from_index(&idx);
        let svg = render_svg(&scene, &overlay, &parse_layers("cutlines,steiner_points,hanan_grid").unwrap());
        assert_eq!(svg.matches("<circle").count(), idx.graph().node_count());
        assert_eq!(svg.matches("class=\"cutline\"").count(), overlay.cutlines.len());
        assert_eq!(svg.matches("class=\"grid\"").count(), 4);
        assert!(parse_layers("obstacles,bogus").is_err());
    }
}
