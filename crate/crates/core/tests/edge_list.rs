use std::io::Cursor;

use drgvr_core::graph_models::generate_drgvr;
use drgvr_core::{Error, LabeledGraph, ModelParams};

#[test]
fn edge_list_round_trip() {
    let m = ModelParams::from_p(1.5, 0.7).unwrap();
    let g = generate_drgvr(m, 5000, 21);
    let mut buf = Vec::new();
    g.write_edge_list(&mut buf).unwrap();
    let h = LabeledGraph::read_edge_list(Cursor::new(&buf)).unwrap();
    assert_eq!(h.labels(), g.labels());
    assert_eq!(h.n, g.n);
    assert_eq!(h.seed, g.seed);
    assert_eq!(h.params, g.params);
    assert!(h.is_edge_subset_of(&g) && g.is_edge_subset_of(&h));
    let mut again = Vec::new();
    h.write_edge_list(&mut again).unwrap();
    assert_eq!(buf, again);
}

#[test]
fn edge_list_rejects_unknown_labels() {
    let m = ModelParams::from_p(1.0, 0.75).unwrap();
    let g = LabeledGraph::from_label_edges(m, 10, 0, vec![2, 5], &[(5, 2)]).unwrap();
    let mut buf = Vec::new();
    g.write_edge_list(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap().replace("5\t2", "7\t2");
    let err = LabeledGraph::read_edge_list(Cursor::new(text)).unwrap_err();
    assert!(matches!(err, Error::Malformed(_) | Error::InvalidParameter { .. }), "{err:?}");
}

#[test]
fn empty_graph_round_trip() {
    let m = ModelParams::from_p(1.0, 0.75).unwrap();
    let g = generate_drgvr(m, 0, 0);
    let mut buf = Vec::new();
    g.write_edge_list(&mut buf).unwrap();
    let h = LabeledGraph::read_edge_list(Cursor::new(buf)).unwrap();
    assert_eq!(h.vertex_count(), 0);
    assert_eq!(h.edge_count(), 0);
}
