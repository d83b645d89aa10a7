//! Marked-up transcripts for tests, demos and the offline pipeline.
//!
//! Markup labels are local to a turn: `⟨e1:…⟩` in two different turns names
//! two different entities.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::Transcript;
use crate::providers::markup::{marked_transcript, MarkupError};
use crate::providers::FakeCoref;

/// One speaker turn of five sentences. Entities 1–3 link the first two
/// sentences, the third has no references, entity 4 links the last two,
/// and entities 5 and 6 each stay inside one of the last two sentences.
/// Chunks: sentences {0,1}, {2}, {3,4}.
pub const FIG3_TURN: [&str; 5] = [
    "⟨e1:The new bus line⟩ was approved by ⟨e2:the mayor⟩ and ⟨e1:it⟩ runs past ⟨e3:the old mill⟩ so ⟨e1:the line⟩ matters to ⟨e2:her⟩.",
    "⟨e2:She⟩ said ⟨e3:the mill⟩ will become housing and ⟨e3:its⟩ owners agree.",
    "Nobody asked about parking at the meeting.",
    "⟨e4:The budget⟩ for ⟨e5:the depot⟩ is small because ⟨e5:the depot⟩ is tiny and ⟨e5:it⟩ shares ⟨e4:the budget⟩ with schools.",
    "⟨e4:That budget⟩ also covers ⟨e6:the drivers⟩ and ⟨e6:their⟩ training so ⟨e6:they⟩ stay safe.",
];

/// The five-sentence turn on its own.
pub fn fig3_transcript() -> (Transcript, FakeCoref) {
    marked_transcript("fig3", [("host", FIG3_TURN)]).expect("fixture markup is valid")
}

/// The same turn between two short unmarked turns by another speaker.
pub fn fig3_in_three_turns() -> (Transcript, FakeCoref) {
    marked_transcript(
        "fig3-embedded",
        [
            ("guest", vec!["Thanks for having me on.", "I want to hear about transit."]),
            ("host", FIG3_TURN.to_vec()),
            ("guest", vec!["That sounds like a lot of change for one town."]),
        ],
    )
    .expect("fixture markup is valid")
}

struct Topic {
    nouns: &'static [&'static str],
    words: &'static [&'static str],
}

const TOPICS: &[Topic] = &[
    Topic {
        nouns: &["the harbor", "the ferry", "the pier"],
        words: &["boats", "tide", "dock", "fishing", "cargo", "sailors", "waves", "port"],
    },
    Topic {
        nouns: &["the school board", "the new curriculum", "the principal"],
        words: &["students", "teachers", "classes", "grades", "homework", "exams", "library"],
    },
    Topic {
        nouns: &["the city budget", "the tax plan", "the council"],
        words: &["spending", "revenue", "deficit", "funding", "taxes", "audit", "vote"],
    },
    Topic {
        nouns: &["the orchestra", "the new album", "the conductor"],
        words: &["music", "concert", "violins", "rehearsal", "tickets", "audience", "tour"],
    },
    Topic {
        nouns: &["the clinic", "the vaccine program", "the head nurse"],
        words: &["patients", "doctors", "appointments", "health", "insurance", "flu", "care"],
    },
    Topic {
        nouns: &["the storm", "the forecast", "the river"],
        words: &["rain", "flooding", "wind", "sandbags", "weather", "evacuation", "levee"],
    },
];

const GLUE: &[&str] = &["and", "the", "really", "so", "about", "with", "we", "think", "maybe", "then"];
const PRONOUNS: &[&str] = &["it", "that", "this one"];
const SPEAKERS: &[&str] = &["host", "guest", "caller"];

/// A generated recording: the transcript, a coreference fake that knows
/// its markup, and the marked turns themselves.
#[derive(Debug, Clone)]
pub struct SyntheticRecording {
    pub transcript: Transcript,
    pub coref: FakeCoref,
    pub marked_turns: Vec<(String, Vec<String>)>,
}

/// Generates a multi-speaker transcript of at least `min_words` words.
/// The same seed always gives the same recording.
///
/// Turns stay on one topic for a few turns at a time. Each turn carries up
/// to three entity chains of three or four mentions over one to three
/// sentences, and sometimes a chain of first-person mentions only.
pub fn synthetic_recording(
    recording_id: &str,
    min_words: usize,
    seed: u64,
) -> Result<SyntheticRecording, MarkupError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut turns: Vec<(String, Vec<String>)> = Vec::new();
    let mut words = 0;
    let mut topic = 0;
    let mut speaker = 0;
    while words < min_words {
        if rng.random_bool(0.35) {
            topic = rng.random_range(0..TOPICS.len());
        }
        speaker = (speaker + rng.random_range(1..SPEAKERS.len())) % SPEAKERS.len();
        let sentences = synthetic_turn(&mut rng, &TOPICS[topic]);
        words += sentences.iter().map(|s| s.split_whitespace().count()).sum::<usize>();
        turns.push((SPEAKERS[speaker].to_string(), sentences));
    }
    let (transcript, coref) = marked_transcript(
        recording_id,
        turns.iter().map(|(s, sents)| (s.as_str(), sents.iter().map(String::as_str))),
    )?;
    Ok(SyntheticRecording { transcript, coref, marked_turns: turns })
}

fn synthetic_turn(rng: &mut ChaCha8Rng, topic: &Topic) -> Vec<String> {
    let n = rng.random_range(1..=8usize);
    // mentions per sentence, as (label, surface)
    let mut mentions: Vec<Vec<(String, String)>> = vec![Vec::new(); n];
    let chains = rng.random_range(0..=3usize);
    for e in 0..chains {
        let first = rng.random_range(0..n);
        let last = (first + rng.random_range(0..3usize)).min(n - 1);
        let noun = *topic.nouns.choose(rng).expect("non-empty");
        let label = format!("e{}", e + 1);
        let count = rng.random_range(3..=4usize);
        for k in 0..count {
            let s = match k {
                0 => first,
                1 => last,
                _ => rng.random_range(first..=last),
            };
            let surface = if k == 0 { noun } else { *PRONOUNS.choose(rng).expect("non-empty") };
            mentions[s].push((label.clone(), surface.to_string()));
        }
    }
    if rng.random_bool(0.3) {
        for _ in 0..3 {
            let s = rng.random_range(0..n);
            let surface = if rng.random_bool(0.5) { "I" } else { "me" };
            mentions[s].push(("self".to_string(), surface.to_string()));
        }
    }

    mentions
        .into_iter()
        .map(|ms| {
            let len = rng.random_range(6..=14usize);
            let mut tokens: Vec<String> = (0..len)
                .map(|_| {
                    let pool = if rng.random_bool(0.6) { topic.words } else { GLUE };
                    pool.choose(rng).expect("non-empty").to_string()
                })
                .collect();
            for (label, surface) in ms {
                let at = rng.random_range(0..=tokens.len());
                tokens.insert(at, format!("⟨{label}:{surface}⟩"));
            }
            let mut s = tokens.join(" ");
            s.push('.');
            s
        })
        .collect()
}
