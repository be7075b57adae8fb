macro_rules! example {
    ($module:ident, $file:literal) => {
        #[allow(dead_code)]
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }
    };
}

example!(ghz_from_two_pairs, "ghz_from_two_pairs.rs");
example!(spanning_tree_weave, "spanning_tree_weave.rs");
example!(minimum_spanning_tree, "minimum_spanning_tree.rs");
example!(hypergraph_fusion, "hypergraph_fusion.rs");
example!(teleportation, "teleportation.rs");
example!(locc_necessity, "locc_necessity.rs");
example!(spec_file_report, "spec_file_report.rs");
example!(transcript_replay, "transcript_replay.rs");

#[test]
fn ghz_from_two_pairs_runs() {
    ghz_from_two_pairs::run_example().expect("ghz_from_two_pairs should run");
}

#[test]
fn spanning_tree_weave_runs() {
    spanning_tree_weave::run_example().expect("spanning_tree_weave should run");
}

#[test]
fn minimum_spanning_tree_runs() {
    minimum_spanning_tree::run_example().expect("minimum_spanning_tree should run");
}

#[test]
fn hypergraph_fusion_runs() {
    hypergraph_fusion::run_example().expect("hypergraph_fusion should run");
}

#[test]
fn teleportation_runs() {
    teleportation::run_example().expect("teleportation should run");
}

#[test]
fn locc_necessity_runs() {
    locc_necessity::run_example().expect("locc_necessity should run");
}

#[test]
fn spec_file_report_runs() {
    spec_file_report::run_example().expect("spec_file_report should run");
}

#[test]
fn transcript_replay_runs() {
    transcript_replay::run_example().expect("transcript_replay should run");
}
