//! Remote clients against a scripted local HTTP server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use skimsum::model::TranscriptBuilder;
use skimsum::providers::remote::RemoteClient;
use skimsum::providers::{
    embed, resolve_coreferences, score_similarity, summarize_text, transcribe, ProviderKind,
    RemoteCoref, RemoteEmbedder, RemoteOptions, RemoteScorer, RemoteSummarizer,
    RemoteTranscriber,
};
use skimsum::ProviderError;

#[derive(Debug, Clone)]
struct Seen {
    authorization: Option<String>,
    body: serde_json::Value,
}

struct Reply {
    status: u16,
    body: String,
    delay: Duration,
}

fn reply(status: u16, body: &str) -> Reply {
    Reply { status, body: body.to_string(), delay: Duration::ZERO }
}

/// Serves the replies in order, one per connection, then stops.
fn serve(replies: Vec<Reply>) -> (String, Arc<Mutex<Vec<Seen>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&seen);
    thread::spawn(move || {
        for r in replies {
            let Ok((stream, _)) = listener.accept() else { return };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0;
            let mut auth = None;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let line = line.trim_end();
                if line.is_empty() {
                    break;
                }
                let (k, v) = line.split_once(':').unwrap_or((line, ""));
                match k.to_ascii_lowercase().as_str() {
                    "content-length" => len = v.trim().parse().unwrap(),
                    "authorization" => auth = Some(v.trim().to_string()),
                    _ => {}
                }
            }
            let mut body = vec![0; len];
            reader.read_exact(&mut body).unwrap();
            log.lock().unwrap().push(Seen {
                authorization: auth,
                body: serde_json::from_slice(&body).unwrap_or(serde_json::Value::Null),
            });
            thread::sleep(r.delay);
            let mut stream = stream;
            let _ = write!(
                stream,
                "HTTP/1.1 {} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
                r.status,
                r.body.len(),
                r.body
            );
        }
    });
    (url, seen)
}

fn options() -> RemoteOptions {
    RemoteOptions {
        timeout: Duration::from_secs(5),
        retries: 2,
        backoff_base: Duration::from_millis(5),
    }
}

fn client(kind: ProviderKind, url: &str, token: Option<&str>) -> RemoteClient {
    RemoteClient::new(kind, url, token.map(str::to_string), "m".into(), options()).unwrap()
}

#[test]
fn retries_server_errors_then_succeeds() {
    let (url, seen) = serve(vec![
        reply(503, "{}"),
        reply(429, "{}"),
        reply(200, r#"{"summary": "the short one"}"#),
    ]);
    let s = RemoteSummarizer::new(client(ProviderKind::Summarizer, &url, Some("sekret")));
    let out = summarize_text("the short one and more words here", 3, &s).unwrap();
    assert_eq!(out, "the short one");
    let seen = seen.lock().unwrap();
    assert_eq!(seen.len(), 3);
    assert_eq!(seen[0].authorization.as_deref(), Some("Bearer sekret"));
    assert_eq!(seen[2].body["max_output_words"], 3);
    assert_eq!(seen[2].body["text"], "the short one and more words here");
}

#[test]
fn gives_up_after_retries() {
    let (url, seen) = serve(vec![reply(500, "{}"), reply(500, "{}"), reply(500, "{}")]);
    let e = RemoteEmbedder::new(client(ProviderKind::Embedder, &url, None));
    let err = embed("hello", &e).unwrap_err();
    assert_eq!(err.code(), "PROVIDER_UNAVAILABLE");
    assert_eq!(seen.lock().unwrap().len(), 3);
    assert!(seen.lock().unwrap()[0].authorization.is_none());
}

#[test]
fn client_errors_are_not_retried() {
    let (url, seen) = serve(vec![reply(401, "{}"), reply(200, r#"{"score": 1.0}"#)]);
    let s = RemoteScorer::new(client(ProviderKind::Scorer, &url, Some("bad")));
    let err = score_similarity("a", "a", &s).unwrap_err();
    assert!(matches!(err, ProviderError::Unavailable { ref message, .. } if message.contains("401")));
    assert_eq!(seen.lock().unwrap().len(), 1);
}

#[test]
fn unparseable_body_is_malformed() {
    let (url, _) = serve(vec![reply(200, "not json")]);
    let s = RemoteScorer::new(client(ProviderKind::Scorer, &url, None));
    assert_eq!(score_similarity("a", "b", &s).unwrap_err().code(), "MALFORMED_RESPONSE");
}

#[test]
fn out_of_range_values_are_rejected() {
    let (url, _) = serve(vec![reply(200, r#"{"score": 1.5}"#)]);
    let s = RemoteScorer::new(client(ProviderKind::Scorer, &url, None));
    assert_eq!(score_similarity("a", "b", &s).unwrap_err().code(), "MALFORMED_RESPONSE");

    let (url, _) = serve(vec![reply(200, r#"{"embedding": [0.0, 0.0]}"#)]);
    let e = RemoteEmbedder::new(client(ProviderKind::Embedder, &url, None));
    assert_eq!(embed("a", &e).unwrap_err().code(), "MALFORMED_RESPONSE");

    let (url, _) = serve(vec![reply(200, r#"{"embedding": [3.0, 4.0]}"#)]);
    let e = RemoteEmbedder::new(client(ProviderKind::Embedder, &url, None));
    assert_eq!(embed("a", &e).unwrap().values(), &[0.6, 0.8]);
}

#[test]
fn empty_summary_is_typed() {
    let (url, _) = serve(vec![reply(200, r#"{"summary": "  "}"#)]);
    let s = RemoteSummarizer::new(client(ProviderKind::Summarizer, &url, None));
    assert_eq!(summarize_text("a b c", 2, &s).unwrap_err().code(), "EMPTY_OUTPUT");
}

#[test]
fn over_budget_summary_is_truncated() {
    let (url, _) = serve(vec![reply(200, r#"{"summary": "one two three four"}"#)]);
    let s = RemoteSummarizer::new(client(ProviderKind::Summarizer, &url, None));
    assert_eq!(summarize_text("a b c d e f", 2, &s).unwrap(), "one two");
}

#[test]
fn coref_indices_become_global() {
    let t = TranscriptBuilder::new("r", "r")
        .turn("a", ["Hello there."])
        .turn("b", ["The dog barked.", "It was loud."])
        .build();
    let (url, seen) = serve(vec![reply(200, r#"{"clusters": [[[0, 1], [3, 3]]]}"#)]);
    let c = RemoteCoref::new(client(ProviderKind::Coreference, &url, None));
    let ann = resolve_coreferences(&t, 1, &c).unwrap();
    let m = &ann.clusters[0].mentions()[1];
    assert_eq!((m.start_word, m.end_word, m.text.as_str()), (5, 5, "It"));
    assert_eq!(ann.clusters[0].sentence_span().first(), 1);
    assert_eq!(seen.lock().unwrap()[0].body["tokens"][3], "It");

    let (url, _) = serve(vec![reply(200, r#"{"clusters": [[[0, 9]]]}"#)]);
    let c = RemoteCoref::new(client(ProviderKind::Coreference, &url, None));
    assert_eq!(resolve_coreferences(&t, 1, &c).unwrap_err().code(), "MALFORMED_RESPONSE");

    let (url, _) = serve(vec![reply(200, r#"{"clusters": [[[-1, 0]]]}"#)]);
    let c = RemoteCoref::new(client(ProviderKind::Coreference, &url, None));
    assert_eq!(resolve_coreferences(&t, 1, &c).unwrap_err().code(), "MALFORMED_RESPONSE");
}

#[test]
fn transcript_without_speakers_is_malformed() {
    let dir = std::env::temp_dir().join(format!("skimsum-remote-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let audio = dir.join("clip.wav");
    std::fs::write(&audio, b"RIFF....").unwrap();

    let mut artifact = TranscriptBuilder::new("clip", "clip")
        .turn("a", ["One two three."])
        .build_artifact();
    for w in &mut artifact.words {
        w.speaker.clear();
    }
    for t in &mut artifact.turns {
        t.speaker.clear();
    }
    let (url, seen) = serve(vec![reply(200, &serde_json::to_string(&artifact).unwrap())]);
    let tr = RemoteTranscriber::new(client(ProviderKind::Transcriber, &url, None));
    match transcribe(&audio, &tr).unwrap_err() {
        ProviderError::MalformedResponse { violations, .. } => assert!(!violations.is_empty()),
        other => panic!("{other:?}"),
    }
    assert_eq!(seen.lock().unwrap()[0].body["file_name"], "clip.wav");
    assert_eq!(seen.lock().unwrap()[0].body["audio_base64"], "UklGRi4uLi4=");

    let good = TranscriptBuilder::new("clip", "clip").turn("a", ["One two three."]).build();
    let (url, _) = serve(vec![reply(200, &good.to_json_pretty())]);
    let tr = RemoteTranscriber::new(client(ProviderKind::Transcriber, &url, None));
    assert_eq!(transcribe(&audio, &tr).unwrap(), good);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn slow_server_times_out_without_hanging() {
    let slow = Reply { status: 200, body: r#"{"score": 1.0}"#.into(), delay: Duration::from_secs(3) };
    let (url, _) = serve(vec![slow]);
    let opts = RemoteOptions { timeout: Duration::from_millis(200), retries: 0, ..options() };
    let s = RemoteScorer::new(RemoteClient::new(ProviderKind::Scorer, &url, None, "m".into(), opts).unwrap());
    let started = Instant::now();
    assert_eq!(score_similarity("a", "a", &s).unwrap_err().code(), "PROVIDER_UNAVAILABLE");
    assert!(started.elapsed() < Duration::from_secs(2));
}

#[test]
fn unreachable_endpoint_is_unavailable() {
    // bind then drop to get a port with nothing listening
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let s = RemoteScorer::new(client(ProviderKind::Scorer, &format!("http://127.0.0.1:{port}/"), None));
    assert_eq!(score_similarity("a", "a", &s).unwrap_err().code(), "PROVIDER_UNAVAILABLE");
}
