use crate::error::{Error, Result};

/// One element of a stored code: `u8` when `K <= 256`, `u16` otherwise.
pub trait CodeElement: Copy + Send + Sync + 'static {
    fn index(self) -> usize;
}

impl CodeElement for u8 {
    #[inline]
    fn index(self) -> usize {
        self as usize
    }
}

impl CodeElement for u16 {
    #[inline]
    fn index(self) -> usize {
        self as usize
    }
}

/// A single PQ code: one sub-codeword index per subspace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PqCode(pub Vec<u16>);

impl PqCode {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u16] {
        &self.0
    }
}

impl From<Vec<u16>> for PqCode {
    fn from(v: Vec<u16>) -> Self {
        PqCode(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Storage {
    Narrow(Vec<u8>),
    Wide(Vec<u16>),
}

/// A dense `N x M` array of codes, one byte per element when `K <= 256`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PqCodes {
    m: usize,
    k: usize,
    storage: Storage,
}

/// Borrowed, element-width-resolved view over a [`PqCodes`] array.
#[derive(Debug, Clone, Copy)]
pub enum CodesView<'a> {
    Narrow(&'a [u8]),
    Wide(&'a [u16]),
}

impl PqCodes {
    pub fn new(m: usize, k: usize) -> Self {
        Self::with_capacity(m, k, 0)
    }

    pub fn with_capacity(m: usize, k: usize, n: usize) -> Self {
        let storage = if k <= 256 {
            Storage::Narrow(Vec::with_capacity(n * m))
        } else {
            Storage::Wide(Vec::with_capacity(n * m))
        };
        PqCodes { m, k, storage }
    }

    pub(crate) fn from_narrow(m: usize, k: usize, data: Vec<u8>) -> Self {
        debug_assert!(k <= 256);
        PqCodes {
            m,
            k,
            storage: Storage::Narrow(data),
        }
    }

    pub(crate) fn from_wide(m: usize, k: usize, data: Vec<u16>) -> Self {
        debug_assert!(k > 256);
        PqCodes {
            m,
            k,
            storage: Storage::Wide(data),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        if self.m == 0 {
            return 0;
        }
        match &self.storage {
            Storage::Narrow(v) => v.len() / self.m,
            Storage::Wide(v) => v.len() / self.m,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Bytes used per code element.
    pub fn element_bytes(&self) -> usize {
        match self.storage {
            Storage::Narrow(_) => 1,
            Storage::Wide(_) => 2,
        }
    }

    pub fn push(&mut self, code: &[u16]) -> Result<()> {
        if code.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: code.len(),
            });
        }
        if let Some(&bad) = code.iter().find(|&&c| c as usize >= self.k) {
            return Err(Error::IndexOutOfRange {
                index: bad as usize,
                bound: self.k,
            });
        }
        match &mut self.storage {
            Storage::Narrow(v) => v.extend(code.iter().map(|&c| c as u8)),
            Storage::Wide(v) => v.extend_from_slice(code),
        }
        Ok(())
    }

    pub fn element(&self, n: usize, m: usize) -> usize {
        let i = n * self.m + m;
        match &self.storage {
            Storage::Narrow(v) => v[i] as usize,
            Storage::Wide(v) => v[i] as usize,
        }
    }

    pub fn get(&self, n: usize) -> PqCode {
        PqCode((0..self.m).map(|m| self.element(n, m) as u16).collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = PqCode> + '_ {
        (0..self.len()).map(move |n| self.get(n))
    }

    pub fn view(&self) -> CodesView<'_> {
        match &self.storage {
            Storage::Narrow(v) => CodesView::Narrow(v),
            Storage::Wide(v) => CodesView::Wide(v),
        }
    }

    /// Appends every code of `other`, which must share `M` and `K`.
    pub fn extend_from(&mut self, other: &PqCodes) -> Result<()> {
        if other.m != self.m || other.k != self.k {
            return Err(Error::InvalidParameter(format!(
                "cannot append codes with M={}, K={} to M={}, K={}",
                other.m, other.k, self.m, self.k
            )));
        }
        match (&mut self.storage, &other.storage) {
            (Storage::Narrow(a), Storage::Narrow(b)) => a.extend_from_slice(b),
            (Storage::Wide(a), Storage::Wide(b)) => a.extend_from_slice(b),
            _ => unreachable!("element width is determined by K"),
        }
        Ok(())
    }

    /// First `n` codes.
    pub fn prefix(&self, n: usize) -> PqCodes {
        let n = n.min(self.len());
        let storage = match &self.storage {
            Storage::Narrow(v) => Storage::Narrow(v[..n * self.m].to_vec()),
            Storage::Wide(v) => Storage::Wide(v[..n * self.m].to_vec()),
        };
        PqCodes {
            m: self.m,
            k: self.k,
            storage,
        }
    }

    pub fn heap_bytes(&self) -> usize {
        match &self.storage {
            Storage::Narrow(v) => v.capacity(),
            Storage::Wide(v) => v.capacity() * 2,
        }
    }
}
