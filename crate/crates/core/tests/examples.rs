macro_rules! example {
    ($name:ident, $file:literal) => {
        #[allow(dead_code)]
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }

        #[test]
        fn $name() {
            $name::run_example().expect("example should run");
        }
    };
}

example!(generate_instances, "generate_instances.rs");
example!(regret_oracle, "regret_oracle.rs");
example!(local_search, "local_search.rs");
example!(guided_search, "guided_search.rs");
example!(edge_features, "edge_features.rs");
example!(dataset_export, "dataset_export.rs");
example!(benchmark, "benchmark.rs");
