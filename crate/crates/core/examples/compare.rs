//! Runs every classical method, plus the learned policy with untrained
//! weights, on one seeded maze and prints their metrics.
//!
//! ```text
//! cargo run --example compare -- 12 7
//! ```

use hexplore::neural::Network;
use hexplore::rng::{self, Stream};
use hexplore::sim::{random_starts, run_episode, EpisodeConfig, Method, DEFAULT_AGENTS};
use hexplore::generate_maze;

fn main() -> hexplore::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u64>().expect("numeric argument"));
    let size = args.next().unwrap_or(10) as usize;
    let seed = args.next().unwrap_or(0);

    let maze = generate_maze(size, seed)?;
    let starts = random_starts(size, DEFAULT_AGENTS, &mut rng::stream(seed, Stream::Starts, 0));
    let net = Network::<f32>::init(&mut rng::stream(seed, Stream::Init, 0));
    let shown: Vec<String> = starts.iter().map(|c| c.to_string()).collect();
    println!("G{size} maze seed {seed}, starts {}", shown.join(" "));
    for method in Method::ALL {
        let out = run_episode(EpisodeConfig::new(method, size, starts.clone()), &maze, Some(&net))?;
        let m = out.metrics;
        println!(
            "{:<20} steps {:>5}  backtracks {:>5}  {:?}",
            method.label(),
            m.simulation_steps,
            m.backtrack_count,
            m.termination
        );
    }
    Ok(())
}
