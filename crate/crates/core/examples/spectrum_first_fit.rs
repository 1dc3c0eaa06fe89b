//! First-fit spectrum assignment on a toy three-link path, showing slot
//! continuity, guard slots and release.

use sdm_rmcsa::spectrum::NetworkState;
use sdm_rmcsa::topology::{DirectedLink, LinkId};
use sdm_rmcsa::SpectrumConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SpectrumConfig { cores: 2, slots_per_core: 24, slot_bandwidth_ghz: 12.5, guard_slots: 1 };
    let mut state = NetworkState::new(8, &cfg);
    let hop = |l: usize| DirectedLink::new(LinkId(l), true);
    let path = [hop(0), hop(1), hop(2)];

    // Unrelated traffic on single hops fragments the spectrum.
    state.allocate(&[hop(0)], 0, 0, 4, 10.0)?;
    state.allocate(&[hop(1)], 0, 6, 3, 10.0)?;
    let blocker = state.allocate(&[hop(2)], 0, 12, 5, 10.0)?;

    for width in [2, 4, 8] {
        match state.find_first_fit_any_core(&path, width) {
            Some((core, start)) => {
                let a = state.allocate(&path, core, start, width, 10.0)?;
                println!(
                    "{width} slots -> core {core}, slots {start}..{} (+{} guard)",
                    start + width,
                    a.guard_slots_used
                );
            }
            None => println!("{width} slots -> blocked"),
        }
    }
    // A window flush with the band edge needs no guard.
    if let Some(start) = state.find_first_fit(&[hop(3)], 1, 24) {
        let a = state.allocate(&[hop(3)], 1, start, 24, 10.0)?;
        println!("full core on link 3: guard used = {}", a.guard_slots_used);
    }

    println!("\n{}", state.dump());
    state.release(blocker.lightpath_id)?;
    state.check_invariants()?;
    println!(
        "after release: {} active lightpaths, SOR of link 2 = {:.3}",
        state.active_count(),
        state.sor(hop(2))
    );
    Ok(())
}
