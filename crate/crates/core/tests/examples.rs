//! Every example runs to completion.

#[allow(dead_code)]
#[path = "../examples/entailment.rs"]
mod entailment;
#[allow(dead_code)]
#[path = "../examples/handshake.rs"]
mod handshake;
#[allow(dead_code)]
#[path = "../examples/insured_sale.rs"]
mod insured_sale;
#[allow(dead_code)]
#[path = "../examples/judge.rs"]
mod judge;
#[allow(dead_code)]
#[path = "../examples/buffet.rs"]
mod buffet;
#[allow(dead_code)]
#[path = "../examples/locality.rs"]
mod locality;
#[allow(dead_code)]
#[path = "../examples/labelled_semantics.rs"]
mod labelled_semantics;
#[allow(dead_code)]
#[path = "../examples/bisimulation.rs"]
mod bisimulation;
#[allow(dead_code)]
#[path = "../examples/pi_encoding.rs"]
mod pi_encoding;
#[allow(dead_code)]
#[path = "../examples/coordination_idioms.rs"]
mod coordination_idioms;
#[allow(dead_code)]
#[path = "../examples/graph_rewriting.rs"]
mod graph_rewriting;
#[allow(dead_code)]
#[path = "../examples/traces.rs"]
mod traces;
#[allow(dead_code)]
#[path = "../examples/random_programs.rs"]
mod random_programs;
#[allow(dead_code)]
#[path = "../examples/normal_forms.rs"]
mod normal_forms;
#[allow(dead_code)]
#[path = "../examples/corpus_tour.rs"]
mod corpus_tour;

#[test]
fn entailment_runs() {
    entailment::run_example().unwrap();
}

#[test]
fn handshake_runs() {
    handshake::run_example().unwrap();
}

#[test]
fn insured_sale_runs() {
    insured_sale::run_example().unwrap();
}

#[test]
fn judge_runs() {
    judge::run_example().unwrap();
}

#[test]
fn buffet_runs() {
    buffet::run_example().unwrap();
}

#[test]
fn locality_runs() {
    locality::run_example().unwrap();
}

#[test]
fn labelled_semantics_runs() {
    labelled_semantics::run_example().unwrap();
}

#[test]
fn bisimulation_runs() {
    bisimulation::run_example().unwrap();
}

#[test]
fn pi_encoding_runs() {
    pi_encoding::run_example().unwrap();
}

#[test]
fn coordination_idioms_runs() {
    coordination_idioms::run_example().unwrap();
}

#[test]
fn graph_rewriting_runs() {
    graph_rewriting::run_example().unwrap();
}

#[test]
fn traces_runs() {
    traces::run_example().unwrap();
}

#[test]
fn random_programs_runs() {
    random_programs::run_example().unwrap();
}

#[test]
fn normal_forms_runs() {
    normal_forms::run_example().unwrap();
}

#[test]
fn corpus_tour_runs() {
    corpus_tour::run_example().unwrap();
}
