use coop_invaders::harness::score_svg;
use quick_xml::events::Event;
use quick_xml::Reader;

/// Parses the whole document and returns the `class` of every polyline.
fn polyline_classes(svg: &str) -> Vec<String> {
    let mut reader = Reader::from_str(svg);
    let mut classes = Vec::new();
    let mut depth = 0i32;
    loop {
        match reader.read_event().expect("well-formed XML") {
            Event::Start(e) => {
                depth += 1;
                if e.name().as_ref() == "polyline" {
                    classes.push(class_of(&e));
                }
            }
            Event::Empty(e) if e.name().as_ref() == "polyline" => classes.push(class_of(&e)),
            Event::End(_) => depth -= 1,
            Event::Eof => break,
            _ => {}
        }
    }
    assert_eq!(depth, 0, "unbalanced tags");
    classes
}

fn class_of(e: &quick_xml::events::BytesStart) -> String {
    e.try_get_attribute("class")
        .unwrap()
        .map(|a| a.value.into_owned())
        .unwrap_or_default()
}

#[test]
fn chart_is_well_formed_with_both_series() {
    let scores: Vec<f64> = (0..300).map(|i| f64::from(i % 37) * 40.0).collect();
    let svg = score_svg("single <player> & \"friends\"", &scores, 50).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    let classes = polyline_classes(&svg);
    assert!(classes.contains(&"score".to_string()));
    assert!(classes.contains(&"rolling".to_string()));
}

#[test]
fn single_and_flat_logs_still_render() {
    polyline_classes(&score_svg("one", &[120.0], 50).unwrap());
    polyline_classes(&score_svg("flat", &[0.0; 10], 3).unwrap());
}
