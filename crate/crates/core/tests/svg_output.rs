use wolff_core::render::{log_spaced, render_convergence, render_packing, RenderSpec};
use wolff_core::{pack_greedy, Packing64, StopRule};

fn parse(svg: &str) -> roxmltree::Document<'_> {
    roxmltree::Document::parse(svg).expect("well-formed XML")
}

#[test]
fn packing_svg_is_well_formed() {
    let p: Packing64 = pack_greedy(StopRule::MaxDiscs(200), 0.99, 1e-6).unwrap();
    for gradient in [true, false] {
        let spec = RenderSpec {
            size: 512,
            gradient,
            annotate: true,
        };
        let svg = render_packing(&p, &spec).unwrap();
        let doc = parse(&svg);
        let root = doc.root_element();
        assert_eq!(root.tag_name().name(), "svg");
        assert_eq!(root.attribute("width"), Some("512"));
        let circles: Vec<_> = root.children().filter(|n| n.has_tag_name("circle")).collect();
        assert_eq!(circles.len(), p.len() + 1);
        for c in &circles {
            for attr in ["cx", "cy", "r"] {
                let v: f64 = c.attribute(attr).unwrap().parse().unwrap();
                assert!((0.0..=512.0).contains(&v));
            }
        }
        let text = root.children().find(|n| n.has_tag_name("text")).unwrap();
        assert!(text.text().unwrap().contains("residual"));
    }
}

#[test]
fn convergence_svg_is_well_formed() {
    let p: Packing64 = pack_greedy(StopRule::MaxDiscs(300), 0.99, 1e-6).unwrap();
    let series = log_spaced(&p.residual_series(), 25);
    let svg = render_convergence(&series, &RenderSpec::default()).unwrap();
    let doc = parse(&svg);
    let line = doc.descendants().find(|n| n.has_tag_name("polyline")).unwrap();
    let count = line.attribute("points").unwrap().split(' ').count();
    assert_eq!(count, series.len());
    assert!(doc
        .descendants()
        .any(|n| n.has_tag_name("text") && n.text().unwrap_or("").starts_with("slope = -")));
}
