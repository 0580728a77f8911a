use std::io::{self, BufWriter, Write};
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, TryRecvError};
use std::thread;
use std::time::Duration;

use ppda_core::dataio::{read_message, write_message, Message};
use ppda_core::policy::PolicyState;

use crate::commands::{policy_hash, prepare, CliError, CliResult, Prepared, SavedWeights};
use crate::RunArgs;

pub struct ServeArgs {
    pub run: RunArgs,
    pub host: String,
    pub port: u16,
    pub round: Option<u64>,
    pub max_batches: Option<u64>,
    pub reward_wait: Duration,
    pub state_out: Option<PathBuf>,
}

enum Event {
    Rewards(Vec<(u32, f32)>),
    Closed,
    Failed(CliError),
}

fn reader(mut stream: TcpStream, tx: mpsc::Sender<Event>) {
    loop {
        let event = match read_message(&mut stream) {
            Ok(None) => Event::Closed,
            Ok(Some(bytes)) => match Message::decode(&bytes) {
                Ok(Message::Reward(frame)) => Event::Rewards(frame.rewards),
                Ok(Message::Batch(_)) => Event::Failed(CliError::Protocol("client sent a batch frame".into())),
                Err(e) => Event::Failed(CliError::Protocol(e.to_string())),
            },
            Err(ppda_core::Error::Io(e)) if is_disconnect(&e) => Event::Closed,
            Err(e) => Event::Failed(CliError::Protocol(e.to_string())),
        };
        let stop = !matches!(event, Event::Rewards(_));
        if tx.send(event).is_err() || stop {
            return;
        }
    }
}

fn is_disconnect(e: &io::Error) -> bool {
    matches!(
        e.kind(),
        io::ErrorKind::BrokenPipe | io::ErrorKind::ConnectionReset | io::ErrorKind::ConnectionAborted
    )
}

struct Inbox {
    rx: Receiver<Event>,
    rewards: Vec<(usize, f64)>,
    closed: bool,
    k: usize,
}

impl Inbox {
    fn take(&mut self, event: Event) -> CliResult<()> {
        match event {
            Event::Rewards(pairs) => {
                for (i, r) in pairs {
                    log::info!("reward subpolicy={i} value={r}");
                    if i as usize >= self.k {
                        return Err(CliError::Protocol(format!(
                            "reward for sub-policy {i}, but there are only {}",
                            self.k
                        )));
                    }
                    self.rewards.push((i as usize, f64::from(r)));
                }
                Ok(())
            }
            Event::Closed => {
                self.closed = true;
                Ok(())
            }
            Event::Failed(e) => Err(e),
        }
    }

    fn drain(&mut self) -> CliResult<()> {
        loop {
            match self.rx.try_recv() {
                Ok(event) => self.take(event)?,
                Err(TryRecvError::Empty) => return Ok(()),
                Err(TryRecvError::Disconnected) => {
                    self.closed = true;
                    return Ok(());
                }
            }
        }
    }

    fn wait(&mut self, timeout: Duration) -> CliResult<()> {
        match self.rx.recv_timeout(timeout) {
            Ok(event) => self.take(event)?,
            Err(RecvTimeoutError::Timeout) => {}
            Err(RecvTimeoutError::Disconnected) => self.closed = true,
        }
        self.drain()
    }
}

fn update(state: &PolicyState, rewards: &[(usize, f64)], round: u64) -> CliResult<PolicyState> {
    let next = state.update_weights(rewards)?;
    let mut touched: Vec<usize> = rewards.iter().map(|&(i, _)| i).collect();
    touched.sort_unstable();
    touched.dedup();
    for i in touched {
        log::info!(
            "round {round}: p[{i}] {:.7} -> {:.7}",
            state.probabilities()[i],
            next.probabilities()[i]
        );
    }
    Ok(next)
}

pub fn serve(args: &ServeArgs) -> CliResult<()> {
    let Prepared { augmenter, mut state } = prepare(&args.run)?;
    let round_len = args.round.unwrap_or(augmenter.batches_per_epoch() as u64).max(1);
    let addr = format!("{}:{}", args.host, args.port);
    let listener = TcpListener::bind(&addr).map_err(CliError::io(&addr))?;
    let local = listener.local_addr().map_err(CliError::io(&addr))?;
    log::info!("listening on {local}");
    let (stream, peer) = listener.accept().map_err(CliError::io(local.to_string()))?;
    log::info!("client connected from {peer}");
    stream.set_nodelay(true).ok();

    let (tx, rx) = mpsc::channel();
    let read_half = stream.try_clone().map_err(CliError::io(peer.to_string()))?;
    thread::spawn(move || reader(read_half, tx));
    let mut writer = BufWriter::new(stream);
    let mut inbox = Inbox {
        rx,
        rewards: Vec::new(),
        closed: false,
        k: state.len(),
    };

    let mut index = 0u64;
    let mut round = 0u64;
    while args.max_batches.is_none_or(|m| index < m) && !inbox.closed {
        let frame = augmenter.batch(&state, index)?;
        let sent = write_message(&mut writer, &frame.encode()).and_then(|()| writer.flush());
        match sent {
            Ok(()) => {}
            Err(e) if is_disconnect(&e) => {
                log::info!("client went away after {index} batches");
                break;
            }
            Err(e) => return Err(CliError::io(peer.to_string())(e)),
        }
        index += 1;
        inbox.drain()?;
        if index.is_multiple_of(round_len) {
            if inbox.rewards.is_empty() && !inbox.closed && !args.reward_wait.is_zero() {
                inbox.wait(args.reward_wait)?;
            }
            round += 1;
            state = update(&state, &inbox.rewards, round)?;
            inbox.rewards.clear();
        }
    }
    inbox.drain()?;
    if !inbox.rewards.is_empty() {
        round += 1;
        state = update(&state, &inbox.rewards, round)?;
    }
    log::info!("served {index} batches over {round} rounds");

    if let Some(path) = &args.state_out {
        let saved = SavedWeights {
            policy_sha256: policy_hash(augmenter.config()),
            weights: state.weights().to_vec(),
        };
        let text = serde_json::to_string_pretty(&saved).expect("weights serialize");
        std::fs::write(path, text).map_err(CliError::io(path))?;
    }
    Ok(())
}
