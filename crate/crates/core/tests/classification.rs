mod common;

use hyperdisp_core::symbols::corpus;

use common::{analysis_grid, check_contact_orders, check_coverage, check_jets, corpus_report};

#[test]
fn zones_partition_the_grid_for_every_corpus_symbol() {
    for name in corpus::names() {
        let r = corpus_report(name);
        let total = analysis_grid(r.dimension).len();
        check_coverage(&r, total).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn gamma0_never_exceeds_gamma_and_isolated_contacts_have_even_order() {
    for name in corpus::names() {
        check_contact_orders(&corpus_report(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn jets_match_central_differences() {
    for name in corpus::names() {
        let s = corpus::symbol(name).unwrap();
        check_jets(&s, 100, 7).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}
