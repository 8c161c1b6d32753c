use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{assign, IdentityVector};
use crate::error::{MotsError, Result};

/// Association settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackerParams {
    /// Matches with cosine similarity at or below this value are discarded.
    pub similarity_threshold: f64,
    /// Frames a track may go unmatched before it is retired.
    pub max_age: u32,
}

impl Default for TrackerParams {
    fn default() -> Self {
        TrackerParams {
            similarity_threshold: 0.5,
            max_age: 2,
        }
    }
}

impl TrackerParams {
    pub fn validate(&self) -> Result<()> {
        let b = self.similarity_threshold;
        if !(b > -1.0 && b <= 1.0) {
            return Err(MotsError::Config(format!(
                "similarity threshold must lie in (-1, 1], got {b}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub track_id: u32,
    pub class_id: u32,
    pub last_vector: IdentityVector,
    pub last_seen: u32,
    pub first_seen: u32,
    /// Frames in which the track was matched or created.
    pub hits: u32,
}

/// Active tracks plus id allocation for one sequence.
#[derive(Debug, Clone)]
pub struct TrackerState {
    params: TrackerParams,
    tracks: Vec<Track>,
    next_id: u32,
    last_frame: Option<u32>,
}

impl TrackerState {
    pub fn new(params: TrackerParams) -> Result<Self> {
        params.validate()?;
        Ok(TrackerState {
            params,
            tracks: Vec::new(),
            next_id: 1,
            last_frame: None,
        })
    }

    pub fn params(&self) -> &TrackerParams {
        &self.params
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    pub fn next_id(&self) -> u32 {
        self.next_id
    }

    pub fn last_frame(&self) -> Option<u32> {
        self.last_frame
    }

    /// Associates one frame of detections, returning a track id per detection
    /// in input order. Matching never crosses classes.
    pub fn step(&mut self, detections: &[(IdentityVector, u32)], frame: u32) -> Result<Vec<u32>> {
        if let Some(last) = self.last_frame {
            if frame <= last {
                return Err(MotsError::FrameOrder { frame, last });
            }
        }
        self.last_frame = Some(frame);

        let mut ids = vec![0u32; detections.len()];
        let mut by_class: BTreeMap<u32, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
        for (t, track) in self.tracks.iter().enumerate() {
            by_class.entry(track.class_id).or_default().0.push(t);
        }
        for (d, (_, class)) in detections.iter().enumerate() {
            by_class.entry(*class).or_default().1.push(d);
        }

        for (track_idx, det_idx) in by_class.values() {
            if track_idx.is_empty() || det_idx.is_empty() {
                continue;
            }
            let sim: Vec<Vec<f64>> = track_idx
                .iter()
                .map(|&t| {
                    det_idx
                        .iter()
                        .map(|&d| self.tracks[t].last_vector.similarity(&detections[d].0))
                        .collect()
                })
                .collect();
            for (ti, di) in assign(&sim, self.params.similarity_threshold) {
                let (t, d) = (track_idx[ti], det_idx[di]);
                let track = &mut self.tracks[t];
                track.last_vector = detections[d].0.clone();
                track.last_seen = frame;
                track.hits += 1;
                ids[d] = track.track_id;
            }
        }

        for (d, (vector, class)) in detections.iter().enumerate() {
            if ids[d] != 0 {
                continue;
            }
            let id = self.next_id;
            self.next_id += 1;
            self.tracks.push(Track {
                track_id: id,
                class_id: *class,
                last_vector: vector.clone(),
                last_seen: frame,
                first_seen: frame,
                hits: 1,
            });
            ids[d] = id;
        }

        let max_age = self.params.max_age;
        self.tracks.retain(|t| frame - t.last_seen <= max_age);
        Ok(ids)
    }
}
