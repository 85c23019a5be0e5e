use crate::kernel::SimTime;
use crate::tcp::TcpSender;

/// Bulk upload with an unlimited backlog. Keeps exactly as many full-MSS
/// chunks queued in the sender as its window can take, so every send is a
/// full segment and the connection is always window-limited.
#[derive(Debug, Clone)]
pub struct FtpSource {
    pub start_time: SimTime,
    offered: u64,
}

impl FtpSource {
    pub fn new(start_time: SimTime) -> Self {
        FtpSource {
            start_time,
            offered: 0,
        }
    }

    /// Tops up the sender's buffer. Returns the bytes added.
    pub fn fill(&mut self, sender: &mut TcpSender, now: SimTime) -> u64 {
        if now < self.start_time {
            return 0;
        }
        let want = sender.window_room().saturating_sub(sender.pending_segments());
        sender.push_bulk(want);
        let bytes = u64::from(want) * u64::from(sender.config().mss);
        self.offered += bytes;
        bytes
    }

    pub fn offered(&self) -> u64 {
        self.offered
    }
}
