use twox_hash::XxHash64;

use super::state::{GameState, MissileOwner, Outcome};

/// Stable 64-bit digest of every field of the state, RNG position included.
///
/// The byte encoding is fixed (little-endian, fields in declaration order),
/// so digests are comparable across runs and machines.
pub fn hash_state(state: &GameState) -> u64 {
    let mut buf = Vec::with_capacity(512);
    let mut put = |bytes: &[u8]| buf.extend_from_slice(bytes);

    // The config is folded in through its canonical JSON form.
    let config = serde_json::to_vec(&state.config).expect("config serializes");
    put(&(config.len() as u64).to_le_bytes());
    put(&config);

    put(&state.frame.to_le_bytes());
    put(&state.score.to_le_bytes());
    put(&state.lives.to_le_bytes());
    for ship in std::iter::once(Some(&state.p1)).chain(std::iter::once(state.p2.as_ref())) {
        match ship {
            Some(s) => {
                put(&[1]);
                put(&s.x.to_le_bytes());
                put(&s.cooldown.to_le_bytes());
                put(&s.invulnerable.to_le_bytes());
            }
            None => put(&[0]),
        }
    }

    let f = &state.formation;
    put(&f.origin_x.to_le_bytes());
    put(&f.origin_y.to_le_bytes());
    put(&(f.rows as u64).to_le_bytes());
    put(&(f.cols as u64).to_le_bytes());
    let alive: Vec<u8> = f.alive.iter().map(|&a| u8::from(a)).collect();
    put(&alive);
    put(&f.dir.to_le_bytes());
    put(&f.move_interval.to_le_bytes());
    put(&f.move_countdown.to_le_bytes());

    put(&(state.missiles.len() as u64).to_le_bytes());
    for m in &state.missiles {
        put(&[match m.owner {
            MissileOwner::P1 => 0,
            MissileOwner::P2 => 1,
            MissileOwner::Alien => 2,
        }]);
        put(&m.x.to_le_bytes());
        put(&m.y.to_le_bytes());
        put(&m.vy.to_le_bytes());
    }

    put(&(state.bunkers.len() as u64).to_le_bytes());
    for b in &state.bunkers {
        put(&b.origin_x.to_le_bytes());
        put(&b.origin_y.to_le_bytes());
        put(&(b.rows as u64).to_le_bytes());
        put(&(b.cols as u64).to_le_bytes());
        let cells: Vec<u8> = b.cells.iter().map(|&a| u8::from(a)).collect();
        put(&cells);
    }

    match &state.mystery {
        Some(m) => {
            put(&[1]);
            put(&m.x.to_le_bytes());
            put(&m.dir.to_le_bytes());
        }
        None => put(&[0]),
    }

    put(&state.rng.get_seed());
    put(&state.rng.get_stream().to_le_bytes());
    put(&state.rng.get_word_pos().to_le_bytes());

    put(&[u8::from(state.done)]);
    put(&[match state.outcome {
        None => 0,
        Some(Outcome::Win) => 1,
        Some(Outcome::LossLives) => 2,
        Some(Outcome::LossInvasion) => 3,
    }]);

    XxHash64::oneshot(0, &buf)
}
