mod common;

use common::{cell, maze, open_walls, set_wall};
use hexplore::error::Error;
use hexplore::hexgrid::{generate_maze, neighbors, Direction, HexCoord};
use hexplore::neural::{Mlp, QFunction, Tensor};
use hexplore::rl::{
    argmax, encode_state, epsilon_greedy, local_observation, q_target, reward_immediate, reward_surrounding,
    total_reward, EpsilonSchedule, Observation, ProgressRule, ReplayBuffer, RewardParams, Transition,
};
use hexplore::rng::{self, Stream};
use hexplore::sim::{random_starts, Episode, EpisodeConfig, Method};
use hexplore::worldmap::ExplorationGraph;
use proptest::prelude::*;

#[test]
fn local_observation_encodes_walls_agents_and_explored_neighbors() {
    let size = 5;
    let mut walls = open_walls(size);
    let here = cell(2, 2);
    set_wall(&mut walls, size, here, Direction::W);
    set_wall(&mut walls, size, here, Direction::SW);
    let m = maze(size, walls);
    let mut g = ExplorationGraph::new(size);
    g.observe_and_visit(&m, cell(3, 2)).unwrap();
    g.observe_and_visit(&m, here).unwrap();

    let local = local_observation(&g, 0, &[here]);
    assert_eq!(local.0, [0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0]);
    assert!(local.wall(Direction::W) && local.wall(Direction::SW));
    assert!(local.explored(Direction::E));

    // Another agent on the NE neighbor sets only that direction's agent bit.
    let ne = cell(2, 1);
    let local = local_observation(&g, 0, &[here, ne]);
    assert!(local.agent(Direction::NE));
    assert_eq!(local.0.iter().filter(|&&b| b == 1).count(), 4);
}

fn pixels_of_cell(c: usize, size: usize, side: usize) -> usize {
    (0..side).filter(|&x| x * size / side == c).count()
}

#[test]
fn fresh_episode_observation() {
    let size = 10;
    let m = maze(size, open_walls(size));
    let mut g = ExplorationGraph::new(size);
    let here = cell(4, 5);
    g.observe_and_visit(&m, here).unwrap();
    let obs = encode_state(&g, 0, &[here]);

    let block = pixels_of_cell(here.col, size, 32) * pixels_of_cell(here.row, size, 32);
    assert_eq!(obs.explored.count_ones(), block);
    assert_eq!(obs.own_pos.count_ones(), block);
    assert_eq!(obs.other_agents.count_ones(), 0);
    assert_eq!(obs.explored.count_ones() + obs.unexplored.count_ones(), 32 * 32);
    for y in 0..32 {
        for x in 0..32 {
            assert_ne!(obs.explored.get(x, y), obs.unexplored.get(x, y));
        }
    }
    // An interior cell of an open grid has no walls to draw.
    assert_eq!(obs.walls.count_ones(), 0);
    assert_eq!(obs.walls.side(), 64);
}

#[test]
fn discovered_walls_are_drawn() {
    let size = 10;
    let mut walls = open_walls(size);
    set_wall(&mut walls, size, cell(4, 5), Direction::E);
    let m = maze(size, walls);
    let mut g = ExplorationGraph::new(size);
    g.observe_and_visit(&m, cell(2, 2)).unwrap();
    assert_eq!(encode_state(&g, 0, &[cell(2, 2)]).walls.count_ones(), 0);
    g.observe_and_visit(&m, cell(4, 5)).unwrap();
    assert!(encode_state(&g, 0, &[cell(4, 5)]).walls.count_ones() > 0);
}

#[test]
fn large_grids_keep_every_agent_visible() {
    for size in [40, 60] {
        let m = generate_maze(size, 5).unwrap();
        let mut g = ExplorationGraph::new(size);
        let starts = random_starts(size, 4, &mut rng::from_seed(size as u64));
        for &s in &starts {
            g.observe_and_visit(&m, s).unwrap();
        }
        for agent in 0..4 {
            let obs = encode_state(&g, agent, &starts);
            assert_eq!(obs.own_pos.side(), 32);
            assert!(obs.own_pos.count_ones() >= 1);
            assert!(obs.other_agents.count_ones() >= 1);
            assert!(obs.walls.count_ones() >= 1);
        }
    }
}

#[test]
fn encoding_is_pure() {
    let m = generate_maze(10, 2).unwrap();
    let mut g = ExplorationGraph::new(10);
    let pos = [cell(1, 1), cell(8, 8)];
    for &p in &pos {
        g.observe_and_visit(&m, p).unwrap();
    }
    let a: Observation = encode_state(&g, 1, &pos);
    let b = encode_state(&g, 1, &pos);
    assert_eq!(a, b);
    assert_eq!(a.to_input::<f32>(), b.to_input::<f32>());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn local_explored_bits_follow_the_shared_map(seed in any::<u64>(), rounds in 0usize..60) {
        let size = 10;
        let m = generate_maze(size, seed).unwrap();
        let starts = random_starts(size, 4, &mut rng::stream(seed, Stream::Starts, 0));
        let mut ep = Episode::new(EpisodeConfig::new(Method::CollabDfs, size, starts), &m).unwrap();
        for _ in 0..rounds {
            if ep.termination().is_some() {
                break;
            }
            ep.round(None, None).unwrap();
        }
        let g = ep.world();
        let pos = ep.positions().to_vec();
        for agent in 0..pos.len() {
            let local = local_observation(g, agent, &pos);
            for (d, n) in neighbors(pos[agent], size) {
                prop_assert_eq!(local.explored(d), g.is_visited(n));
            }
            let obs = encode_state(g, agent, &pos);
            prop_assert_eq!(obs.local, local);
        }
    }

    #[test]
    fn valid_moves_pay_at_least_fifty(explored in 0usize..=3600, unexplored in 0usize..=3600) {
        prop_assert!(reward_immediate(true, explored, unexplored) >= 50.0);
        prop_assert_eq!(reward_immediate(false, explored, unexplored), -20.0);
    }

    #[test]
    fn total_is_the_sum(imm in -100.0f64..5000.0, sur in 0u8..=6) {
        prop_assert_eq!(total_reward(imm, sur as f64), imm + sur as f64);
    }
}

#[test]
fn reward_examples() {
    assert_eq!(reward_immediate(true, 10, 90), 50.0);
    assert_eq!(reward_immediate(true, 90, 10), 80.0);
    assert_eq!(reward_immediate(false, 90, 10), -20.0);
    assert_eq!(total_reward(50.0, 6.0), 56.0);
    assert_eq!(total_reward(-20.0, 0.0), -20.0);
    assert_eq!(total_reward(80.0, 3.0), 83.0);

    let min = RewardParams {
        rule: ProgressRule::Min,
        ..RewardParams::default()
    };
    assert_eq!(min.immediate(true, 10, 90), -80.0);
    assert_eq!(min.immediate(true, 90, 10), 50.0);
}

#[test]
fn surrounding_reward_counts_unvisited_in_grid_neighbors() {
    let size = 5;
    let m = maze(size, open_walls(size));
    let mut g = ExplorationGraph::new(size);
    g.observe_and_visit(&m, cell(2, 2)).unwrap();
    assert_eq!(reward_surrounding(&g, cell(2, 2)), 6.0);

    // Corner (0,0) has E, SE and (on an even row) no SW in the grid: 2 neighbors.
    let corner = cell(0, 0);
    assert_eq!(neighbors(corner, size).count(), 2);
    g.observe_and_visit(&m, corner).unwrap();
    assert_eq!(reward_surrounding(&g, corner), 2.0);
    g.observe_and_visit(&m, cell(1, 0)).unwrap();
    assert_eq!(reward_surrounding(&g, corner), 1.0);

    // Walls do not matter: only visit status of in-grid neighbors counts.
    for (_, n) in neighbors(cell(2, 2), size).collect::<Vec<_>>() {
        g.observe_and_visit(&m, n).unwrap();
    }
    assert_eq!(reward_surrounding(&g, cell(2, 2)), 0.0);
}

#[test]
fn greedy_selection_and_ties() {
    let mut r = rng::from_seed(1);
    assert_eq!(epsilon_greedy(&[1.0, 5.0, 2.0, 0.0, 0.0, 0.0], 0.0, &mut r), 1);
    assert_eq!(epsilon_greedy(&[3.0, 3.0, 0.0, 0.0, 0.0, 0.0], 0.0, &mut r), 0);
    assert_eq!(argmax(&[0, 0, 0, 0, 0, 7]), 5);
}

#[test]
fn full_exploration_is_uniform() {
    let mut r = rng::from_seed(2);
    let mut counts = [0usize; 6];
    let draws = 10_000;
    for _ in 0..draws {
        counts[epsilon_greedy(&[9.0, 0.0, 0.0, 0.0, 0.0, 0.0], 1.0, &mut r)] += 1;
    }
    for c in counts {
        let f = c as f64 / draws as f64;
        assert!((f - 1.0 / 6.0).abs() < 0.02, "frequency {f}");
    }
}

#[test]
fn epsilon_schedule_decays_linearly() {
    let s = EpsilonSchedule::default();
    assert_eq!(s.value(0), 1.0);
    assert!((s.value(100) - 0.525).abs() < 1e-12);
    assert!((s.value(200) - 0.05).abs() < 1e-12);
    assert!((s.value(1000) - 0.05).abs() < 1e-12);
    assert!((1..300).all(|e| s.value(e) <= s.value(e - 1)));
}

fn constant_q(values: [f32; 6]) -> Mlp<f32> {
    let mut mlp = Mlp::<f32>::init(1, 2, 6, &mut rng::from_seed(0)).zeros_like();
    mlp.out.bias.data_mut().copy_from_slice(&values);
    mlp
}

#[test]
fn bellman_target() {
    let net = constant_q([2.0, -1.0, 0.0, 1.0, 0.5, 1.5]);
    let s = Tensor::from_vec(&[1], vec![0.0f32]).unwrap();
    assert_eq!(q_target(5.0, &s, true, &net, 0.99).unwrap(), 5.0);
    assert!((q_target(1.0, &s, false, &net, 0.99).unwrap() - 2.98).abs() < 1e-9);
    assert_eq!(q_target(1.0, &s, false, &net, 0.0).unwrap(), 1.0);
}

fn transition(tag: usize) -> Transition {
    let m = maze(4, open_walls(4));
    let mut g = ExplorationGraph::new(4);
    let c = HexCoord::from_index(tag % 16, 4);
    g.observe_and_visit(&m, c).unwrap();
    let obs = encode_state(&g, 0, &[c]);
    Transition {
        state: obs.clone(),
        action: tag % 6,
        reward: tag as f64,
        next_state: obs,
        terminal: false,
    }
}

#[test]
fn replay_buffer_is_fifo_and_seeded() {
    let mut buf = ReplayBuffer::new(3, rng::from_seed(4));
    for i in 0..4 {
        buf.push(transition(i));
    }
    assert_eq!(buf.len(), 3);
    let rewards: Vec<f64> = buf.iter().map(|t| t.reward).collect();
    assert_eq!(rewards, vec![1.0, 2.0, 3.0]);
    assert_eq!(buf.sample(3).unwrap().len(), 3);

    let mut a = ReplayBuffer::new(10, rng::from_seed(9));
    let mut b = ReplayBuffer::new(10, rng::from_seed(9));
    for i in 0..10 {
        a.push(transition(i));
        b.push(transition(i));
    }
    assert_eq!(a.sample_indices(8).unwrap(), b.sample_indices(8).unwrap());

    let mut small = ReplayBuffer::new(10, rng::from_seed(1));
    small.push(transition(0));
    assert!(matches!(
        small.sample(2),
        Err(Error::BufferNotReady { have: 1, need: 2 })
    ));
}

#[test]
fn network_input_matches_observation() {
    let t = transition(5);
    let input = t.state.to_input::<f32>();
    assert_eq!(input.maps[0].shape(), &[1, 32, 32]);
    assert_eq!(input.walls.shape(), &[1, 64, 64]);
    assert_eq!(input.local.shape(), &[18]);
    let ones = input.maps[2].data().iter().filter(|&&v| v == 1.0).count();
    assert_eq!(ones, t.state.own_pos.count_ones());
}
