//! Generate a two-view dataset, round-trip it through CSV, then shuffle and
//! thin the views the way the experiments do.
//!
//! cargo run --example corruption

use capimac::data::{
    apply_corruption, generate_synthetic, load_dataset, make_corruption_plan, make_corruption_plan_per_view,
    write_dataset, SyntheticSpec,
};

fn main() -> capimac::Result<()> {
    let ds = generate_synthetic(&SyntheticSpec {
        k: 3,
        n: 12,
        dims: vec![4, 6],
        separation: 6.0,
        seed: 7,
    })?;
    println!("generated: {:?}", ds.summary());

    let dir = std::env::temp_dir().join("capimac-corruption-example");
    write_dataset(&ds, &dir)?;
    let loaded = load_dataset(&dir)?;
    println!("reloaded from {}: {:?}", dir.display(), loaded.summary());

    let plan = make_corruption_plan(&loaded, 0.5, 0.5, 1)?;
    let corrupted = apply_corruption(&loaded, &plan)?;
    println!("\nalign 0.5, missing 0.5: aligned block {}", plan.aligned_count());
    for v in 0..2 {
        println!(
            "  view {v}: rows {:?} <- samples {:?}, labels {:?}",
            corrupted.views[v].n_rows(),
            corrupted.origins[v],
            corrupted.virtual_labels[v]
        );
    }

    let plan = make_corruption_plan_per_view(&loaded, 0.5, &[0.5, 0.0], 1)?;
    let corrupted = apply_corruption(&loaded, &plan)?;
    println!("\nper-view missing rates (0.5, 0.0): rows {:?}", corrupted.row_counts());
    Ok(())
}
