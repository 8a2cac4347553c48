//! Access probes for counting how much index and vector memory a query reads.
//!
//! Query code is generic over [`Probe`]; the public query methods use
//! [`NoProbe`], which compiles away, and the `*_probed` variants accept an
//! [`AccessCounter`].

/// Receives one callback per index entry or bit-vector word read.
pub trait Probe {
    fn l0(&mut self) {}
    fn l1(&mut self) {}
    fn l2(&mut self) {}
    fn word(&mut self) {}
}

/// A probe that records nothing.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoProbe;

impl Probe for NoProbe {}

/// Counts reads per index level.
///
/// For interleaved layouts, reading one L1/L2 entry counts as one `l1` read
/// plus one `l2` read per L2 field extracted from it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AccessCounter {
    pub l0_reads: usize,
    pub l1_reads: usize,
    pub l2_reads: usize,
    pub word_reads: usize,
}

impl Probe for AccessCounter {
    #[inline]
    fn l0(&mut self) {
        self.l0_reads += 1;
    }
    #[inline]
    fn l1(&mut self) {
        self.l1_reads += 1;
    }
    #[inline]
    fn l2(&mut self) {
        self.l2_reads += 1;
    }
    #[inline]
    fn word(&mut self) {
        self.word_reads += 1;
    }
}
