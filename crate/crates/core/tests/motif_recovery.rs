use graphext::datasets::generate_ba_2motifs;
use graphext::eval::sparsity_sweep;
use graphext::explainer::{GraphGame, ModelScorer};
use graphext::gnn::cycle_detector;
use graphext::{exact_shapley, explain_graph, top_k_mask, Graph, NodeSet, SampleConfig, Scale};

fn top5(values: &[f64]) -> NodeSet {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    NodeSet::new(order.into_iter().take(5))
}

#[test]
fn exact_values_single_out_a_small_cycle() {
    // A 5-cycle on 0..5 with a two-node tail 4-5-6.
    let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (4, 5), (5, 6)];
    let g = Graph::new(1, vec![vec![1.0]; 7], edges).unwrap();
    let m = cycle_detector(10.0);
    let y = m.forward(&g).unwrap().label;
    assert_eq!(y, 1);
    let game = GraphGame::new(&g, ModelScorer { model: &m, class: y, scale: Scale::Prob });
    let exact = exact_shapley(&game, 7).unwrap();
    assert_eq!(top5(&exact), NodeSet::new(0..5));

    let r = explain_graph(&m, &g, &SampleConfig::new(500, 2).into()).unwrap();
    assert_eq!(top_k_mask(&r, 5).unwrap(), NodeSet::new(0..5));
}

#[test]
fn planted_motifs_rank_first() {
    let set = generate_ba_2motifs(4, 11).unwrap();
    let m = cycle_detector(10.0);
    for (g, truth) in set.graphs.iter().zip(set.ground_truth.as_ref().unwrap()) {
        let r = explain_graph(&m, g, &SampleConfig::new(200, 5).into()).unwrap();
        assert_eq!(&top_k_mask(&r, 5).unwrap(), truth);
    }
}

#[test]
fn fidelity_plus_grows_with_mask_size() {
    let set = generate_ba_2motifs(6, 4).unwrap();
    let m = cycle_detector(10.0);
    let points = sparsity_sweep(&m, &set.graphs, &SampleConfig::new(100, 0).into(), &[0.8, 0.95]).unwrap();
    let at = |s: f64| points.iter().min_by(|a, b| (a.sparsity - s).abs().total_cmp(&(b.sparsity - s).abs())).unwrap();
    assert!(at(0.8).fidelity_plus >= at(0.95).fidelity_plus);
}
