//! Identity vectors, cross-frame matching and track lifecycle.

mod hungarian;
mod identity;
mod tracker;

pub use hungarian::max_similarity_matching;
pub use identity::{embed_roi, IdentityEmbedder, IdentityVector, IDENTITY_DIM};
pub use tracker::{Track, TrackerParams, TrackerState};

/// Cosine similarity of each track's latest vector (rows) to each detection (columns).
pub fn similarity_matrix(tracks: &[Track], detections: &[IdentityVector]) -> Vec<Vec<f64>> {
    tracks
        .iter()
        .map(|t| detections.iter().map(|d| t.last_vector.similarity(d)).collect())
        .collect()
}

/// Optimal one-to-one matching, then drops pairs with similarity `<= threshold`.
pub fn assign(sim: &[Vec<f64>], threshold: f64) -> Vec<(usize, usize)> {
    max_similarity_matching(sim)
        .into_iter()
        .filter(|&(r, c)| sim[r][c] > threshold)
        .collect()
}
