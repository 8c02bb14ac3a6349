//! Runs every example so they cannot rot.

#[path = "../examples/quantize.rs"]
mod quantize;

#[path = "../examples/key_generator.rs"]
mod key_generator;

#[path = "../examples/single_table.rs"]
mod single_table;

#[path = "../examples/multi_table.rs"]
mod multi_table;

#[path = "../examples/planning.rs"]
mod planning;

#[path = "../examples/opq_table.rs"]
mod opq_table;

#[path = "../examples/pipeline.rs"]
mod pipeline;

#[test]
fn quantize_example_runs() {
    quantize::run_example().expect("quantize example should run");
}

#[test]
fn key_generator_example_runs() {
    key_generator::run_example().expect("key_generator example should run");
}

#[test]
fn single_table_example_runs() {
    single_table::run_example().expect("single_table example should run");
}

#[test]
fn multi_table_example_runs() {
    multi_table::run_example().expect("multi_table example should run");
}

#[test]
fn planning_example_runs() {
    planning::run_example().expect("planning example should run");
}

#[test]
fn opq_table_example_runs() {
    opq_table::run_example().expect("opq_table example should run");
}

#[test]
fn pipeline_example_runs() {
    pipeline::run_example().expect("pipeline example should run");
}
