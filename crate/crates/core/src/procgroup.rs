//! A deterministic in-process stand-in for a group of message-passing processes.
//!
//! Each rank runs on its own thread. Messages are buffered and matched by
//! `(source, destination, tag)` in send order, so results never depend on scheduling.
//! A run fails with [`GroupError::Deadlock`] as soon as every live rank waits on a
//! message that nobody can send any more.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::sync::{Condvar, Mutex, MutexGuard};

use thiserror::Error;

use crate::error::{AmrError, Result};

/// Tags at or above this value are reserved for collectives.
pub const RESERVED_TAG: u64 = 1 << 63;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("a process group needs at least one rank")]
    EmptyGroup,
    #[error("tag {0:#x} is reserved for collectives")]
    ReservedTag(u64),
    #[error("rank {rank} addressed rank {peer}, but the group has {size} ranks")]
    BadRank { rank: usize, peer: usize, size: usize },
    #[error("deadlock: {0}")]
    Deadlock(String),
    #[error("{count} message(s) were never received: {detail}")]
    Undelivered { count: usize, detail: String },
    #[error("rank {rank} failed: {message}")]
    RankFailed { rank: usize, message: String },
    #[error("rank {rank} panicked")]
    Panicked { rank: usize },
}

/// One entry of the message log.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LogEntry {
    pub src: usize,
    pub dst: usize,
    pub tag: u64,
    pub bytes: usize,
}

/// Audit record of a completed run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupRun {
    pub size: usize,
    /// Sends grouped by source rank, each group in program order.
    pub log: Vec<LogEntry>,
}

impl GroupRun {
    /// Newline-delimited `src dst tag bytes` records.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for e in &self.log {
            let _ = writeln!(s, "{} {} {} {}", e.src, e.dst, e.tag, e.bytes);
        }
        s
    }

    pub fn total_bytes(&self) -> usize {
        self.log.iter().map(|e| e.bytes).sum()
    }
}

type Key = (usize, usize, u64);

struct State {
    queues: HashMap<Key, VecDeque<Vec<u8>>>,
    waiting: Vec<Option<Key>>,
    finished: Vec<bool>,
    failure: Option<String>,
    logs: Vec<Vec<LogEntry>>,
}

impl State {
    fn has_message(&self, k: &Key) -> bool {
        self.queues.get(k).is_some_and(|q| !q.is_empty())
    }

    fn is_stuck(&self) -> bool {
        (0..self.finished.len()).all(|r| self.finished[r] || self.waiting[r].is_some_and(|k| !self.has_message(&k)))
    }

    fn describe_waits(&self) -> String {
        let waits: Vec<String> = self
            .waiting
            .iter()
            .enumerate()
            .filter_map(|(r, w)| w.map(|(src, _, tag)| format!("rank {r} waits for rank {src} tag {tag}")))
            .collect();
        waits.join(", ")
    }
}

struct Shared {
    state: Mutex<State>,
    cv: Condvar,
}

impl Shared {
    fn lock(&self) -> MutexGuard<'_, State> {
        self.state.lock().unwrap_or_else(|p| p.into_inner())
    }
}

/// Handle through which one rank communicates.
pub struct Comm<'a> {
    rank: usize,
    size: usize,
    shared: &'a Shared,
    collective_seq: u64,
}

impl Comm<'_> {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn size(&self) -> usize {
        self.size
    }

    fn check_peer(&self, peer: usize) -> Result<(), GroupError> {
        if peer >= self.size {
            Err(GroupError::BadRank { rank: self.rank, peer, size: self.size })
        } else {
            Ok(())
        }
    }

    fn check_tag(tag: u64) -> Result<(), GroupError> {
        if tag >= RESERVED_TAG {
            Err(GroupError::ReservedTag(tag))
        } else {
            Ok(())
        }
    }

    /// Buffered, non-blocking send. Tags must lie below [`RESERVED_TAG`].
    pub fn send(&mut self, dst: usize, tag: u64, payload: Vec<u8>) -> Result<()> {
        Self::check_tag(tag)?;
        self.post(dst, tag, payload)
    }

    /// Blocking receive of the oldest message from `src` with `tag`.
    pub fn recv(&mut self, src: usize, tag: u64) -> Result<Vec<u8>> {
        Self::check_tag(tag)?;
        self.take(src, tag)
    }

    fn post(&mut self, dst: usize, tag: u64, payload: Vec<u8>) -> Result<()> {
        self.check_peer(dst)?;
        let mut st = self.shared.lock();
        st.logs[self.rank].push(LogEntry { src: self.rank, dst, tag, bytes: payload.len() });
        st.queues.entry((self.rank, dst, tag)).or_default().push_back(payload);
        drop(st);
        self.shared.cv.notify_all();
        Ok(())
    }

    fn take(&mut self, src: usize, tag: u64) -> Result<Vec<u8>> {
        self.check_peer(src)?;
        let key = (src, self.rank, tag);
        let mut st = self.shared.lock();
        loop {
            if let Some(msg) = st.queues.get_mut(&key).and_then(|q| q.pop_front()) {
                st.waiting[self.rank] = None;
                return Ok(msg);
            }
            if let Some(f) = &st.failure {
                return Err(GroupError::Deadlock(f.clone()).into());
            }
            st.waiting[self.rank] = Some(key);
            if st.is_stuck() {
                let msg = st.describe_waits();
                st.failure = Some(msg.clone());
                drop(st);
                self.shared.cv.notify_all();
                return Err(GroupError::Deadlock(msg).into());
            }
            st = self.shared.cv.wait(st).unwrap_or_else(|p| p.into_inner());
        }
    }

    /// One message with `tag` from each rank in `first..=last`, in rank order.
    pub fn recv_range(&mut self, first: usize, last: usize, tag: u64) -> Result<Vec<(usize, Vec<u8>)>> {
        (first..=last).map(|src| Ok((src, self.recv(src, tag)?))).collect()
    }

    fn next_collective_tag(&mut self) -> u64 {
        self.collective_seq += 1;
        RESERVED_TAG | self.collective_seq
    }

    /// Every rank's contribution, indexed by rank.
    pub fn allgather(&mut self, local: Vec<u8>) -> Result<Vec<Vec<u8>>> {
        let tag = self.next_collective_tag();
        let me = self.rank;
        for dst in (0..self.size).filter(|&d| d != me) {
            self.post(dst, tag, local.clone())?;
        }
        let mut out = Vec::with_capacity(self.size);
        for src in 0..self.size {
            if src == self.rank {
                out.push(local.clone());
            } else {
                out.push(self.take(src, tag)?);
            }
        }
        Ok(out)
    }

    pub fn allgather_u64(&mut self, local: u64) -> Result<Vec<u64>> {
        let all = self.allgather(local.to_le_bytes().to_vec())?;
        all.iter().map(|b| PayloadReader::new(b).u64()).collect()
    }

    pub fn barrier(&mut self) -> Result<()> {
        self.allgather(Vec::new()).map(|_| ())
    }

    /// Sum of `local` over all lower ranks, passed along the rank chain.
    pub fn exclusive_prefix_scan(&mut self, local: u64) -> Result<u64> {
        let tag = self.next_collective_tag();
        let before = if self.rank == 0 { 0 } else { PayloadReader::new(&self.take(self.rank - 1, tag)?).u64()? };
        if self.rank + 1 < self.size {
            self.post(self.rank + 1, tag, (before + local).to_le_bytes().to_vec())?;
        }
        Ok(before)
    }

    pub fn allreduce_sum(&mut self, local: u64) -> Result<u64> {
        Ok(self.allgather_u64(local)?.iter().sum())
    }

    pub fn allreduce_wrapping_sum(&mut self, local: u64) -> Result<u64> {
        Ok(self.allgather_u64(local)?.iter().fold(0u64, |a, &b| a.wrapping_add(b)))
    }
}

/// Marks its rank finished when dropped, also on early return or panic.
struct Finish<'a> {
    shared: &'a Shared,
    rank: usize,
}

impl Drop for Finish<'_> {
    fn drop(&mut self) {
        let mut st = self.shared.lock();
        st.finished[self.rank] = true;
        st.waiting[self.rank] = None;
        if st.failure.is_none() && st.is_stuck() && st.waiting.iter().any(Option::is_some) {
            st.failure = Some(st.describe_waits());
        }
        drop(st);
        self.shared.cv.notify_all();
    }
}

/// Run `program` on `size` ranks and return each rank's result in rank order.
pub fn run<T, F>(size: usize, program: F) -> Result<(Vec<T>, GroupRun), GroupError>
where
    T: Send,
    F: Fn(&mut Comm<'_>) -> Result<T> + Sync,
{
    if size == 0 {
        return Err(GroupError::EmptyGroup);
    }
    let shared = Shared {
        state: Mutex::new(State {
            queues: HashMap::new(),
            waiting: vec![None; size],
            finished: vec![false; size],
            failure: None,
            logs: vec![Vec::new(); size],
        }),
        cv: Condvar::new(),
    };
    let outcomes: Vec<std::thread::Result<Result<T>>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..size)
            .map(|rank| {
                let shared = &shared;
                let program = &program;
                std::thread::Builder::new()
                    .name(format!("rank-{rank}"))
                    .spawn_scoped(s, move || {
                        let _finish = Finish { shared, rank };
                        let mut comm = Comm { rank, size, shared, collective_seq: 0 };
                        program(&mut comm)
                    })
                    .expect("spawn rank thread")
            })
            .collect();
        handles.into_iter().map(|h| h.join()).collect()
    });

    let mut results = Vec::with_capacity(size);
    let mut deadlock = None;
    for (rank, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Err(_) => return Err(GroupError::Panicked { rank }),
            Ok(Ok(v)) => results.push(v),
            Ok(Err(AmrError::Group(GroupError::Deadlock(m)))) => {
                deadlock.get_or_insert(m);
            }
            Ok(Err(e)) => return Err(GroupError::RankFailed { rank, message: e.to_string() }),
        }
    }
    if let Some(m) = deadlock {
        return Err(GroupError::Deadlock(m));
    }
    let st = shared.state.into_inner().unwrap_or_else(|p| p.into_inner());
    let mut left: Vec<(&Key, usize)> = st.queues.iter().filter(|(_, q)| !q.is_empty()).map(|(k, q)| (k, q.len())).collect();
    if !left.is_empty() {
        left.sort();
        let count = left.iter().map(|(_, n)| n).sum();
        let detail = left.iter().map(|((s, d, t), n)| format!("{n} from {s} to {d} tag {t}")).collect::<Vec<_>>().join(", ");
        return Err(GroupError::Undelivered { count, detail });
    }
    let log = st.logs.into_iter().flatten().collect();
    Ok((results, GroupRun { size, log }))
}

/// Little-endian payload builder.
#[derive(Debug, Default, Clone)]
pub struct PayloadWriter {
    buf: Vec<u8>,
}

impl PayloadWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn u8(&mut self, v: u8) -> &mut Self {
        self.buf.push(v);
        self
    }

    pub fn i8(&mut self, v: i8) -> &mut Self {
        self.u8(v as u8)
    }

    pub fn i32(&mut self, v: i32) -> &mut Self {
        self.buf.extend_from_slice(&v.to_le_bytes());
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.buf.extend_from_slice(&v.to_le_bytes());
        self
    }

    pub fn u128(&mut self, v: u128) -> &mut Self {
        self.buf.extend_from_slice(&v.to_le_bytes());
        self
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

/// Reader matching [`PayloadWriter`].
#[derive(Debug, Clone)]
pub struct PayloadReader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> PayloadReader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        PayloadReader { buf, pos: 0 }
    }

    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let bytes = self
            .buf
            .get(self.pos..end)
            .ok_or_else(|| AmrError::Payload(format!("need {N} bytes at offset {}, have {}", self.pos, self.buf.len())))?;
        self.pos = end;
        Ok(bytes.try_into().expect("slice of length N"))
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take::<1>()?[0])
    }

    pub fn i8(&mut self) -> Result<i8> {
        Ok(self.u8()? as i8)
    }

    pub fn i32(&mut self) -> Result<i32> {
        Ok(i32::from_le_bytes(self.take()?))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }

    pub fn u128(&mut self) -> Result<u128> {
        Ok(u128::from_le_bytes(self.take()?))
    }

    pub fn is_empty(&self) -> bool {
        self.pos == self.buf.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_forward() {
        let (res, run) = run(4, |c| {
            let (r, p) = (c.rank(), c.size());
            c.send((r + 1) % p, 7, vec![r as u8])?;
            Ok(c.recv((r + p - 1) % p, 7)?[0] as usize)
        })
        .unwrap();
        assert_eq!(res, vec![3, 0, 1, 2]);
        assert_eq!(run.log.len(), 4);
    }

    #[test]
    fn scan_of_small_counts() {
        let locals = [8u64, 10, 8];
        let (res, _) = run(3, |c| c.exclusive_prefix_scan(locals[c.rank()])).unwrap();
        assert_eq!(res, vec![0, 8, 18]);
    }

    #[test]
    fn missing_sender_is_a_deadlock() {
        let err = run(2, |c| if c.rank() == 0 { c.recv(1, 3).map(|_| ()) } else { Ok(()) }).unwrap_err();
        assert!(matches!(err, GroupError::Deadlock(_)), "{err}");
    }

    #[test]
    fn partial_collective_is_a_deadlock() {
        // the last rank never blocks in a chain scan, so its absence shows up as a lost message
        let err = run(3, |c| if c.rank() < 2 { c.exclusive_prefix_scan(1).map(|_| ()) } else { Ok(()) }).unwrap_err();
        assert!(matches!(err, GroupError::Undelivered { .. }));
        let err = run(3, |c| if c.rank() != 1 { c.exclusive_prefix_scan(1).map(|_| ()) } else { Ok(()) }).unwrap_err();
        assert!(matches!(err, GroupError::Deadlock(_)));
    }

    #[test]
    fn unreceived_message_is_reported() {
        let err = run(2, |c| if c.rank() == 0 { c.send(1, 1, vec![1, 2]) } else { Ok(()) }).unwrap_err();
        assert_eq!(err, GroupError::Undelivered { count: 1, detail: "1 from 0 to 1 tag 1".into() });
    }

    #[test]
    fn tag_selective_receive() {
        let (res, _) = run(2, |c| {
            if c.rank() == 0 {
                c.send(1, 1, vec![1])?;
                c.send(1, 2, vec![2])?;
                Ok(vec![])
            } else {
                let b = c.recv(0, 2)?;
                let a = c.recv(0, 1)?;
                Ok(vec![b[0], a[0]])
            }
        })
        .unwrap();
        assert_eq!(res[1], vec![2, 1]);
    }
}
