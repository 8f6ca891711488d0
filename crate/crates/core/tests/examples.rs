// Every example must run to completion.

mod agreement_alpha {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/agreement_alpha.rs"));

    #[test]
    fn runs() {
        run_example().unwrap();
    }
}

mod classify_concepts {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/classify_concepts.rs"));

    #[test]
    fn runs() {
        run_example().unwrap();
    }
}

mod color_histogram {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/color_histogram.rs"));

    #[test]
    fn runs() {
        run_example().unwrap();
    }
}

mod eigenspectrum_diversity {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/eigenspectrum_diversity.rs"));

    #[test]
    fn runs() {
        run_example().unwrap();
    }
}

mod embeddings_roundtrip {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/embeddings_roundtrip.rs"));

    #[test]
    fn runs() {
        run_example().unwrap();
    }
}

mod gist_descriptor {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/gist_descriptor.rs"));

    #[test]
    fn runs() {
        run_example().unwrap();
    }
}

mod hog_descriptor {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/hog_descriptor.rs"));

    #[test]
    fn runs() {
        run_example().unwrap();
    }
}

mod nearest_neighbors {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/nearest_neighbors.rs"));

    #[test]
    fn runs() {
        run_example().unwrap();
    }
}

mod object_signals {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/object_signals.rs"));

    #[test]
    fn runs() {
        run_example().unwrap();
    }
}

mod regress_concreteness {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/regress_concreteness.rs"));

    #[test]
    fn runs() {
        run_example().unwrap();
    }
}

mod surf_bag_of_words {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/surf_bag_of_words.rs"));

    #[test]
    fn runs() {
        run_example().unwrap();
    }
}

mod synthetic_pipeline {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/synthetic_pipeline.rs"));

    #[test]
    fn runs() {
        run_example().unwrap();
    }
}

mod texture_descriptors {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/texture_descriptors.rs"));

    #[test]
    fn runs() {
        run_example().unwrap();
    }
}
