use crate::corpus::{Corpus, InvocationId};
use crate::similarity::DeclRef;

/// Binary project × declaration × invocation ratings, stored as one
/// compressed sparse row slice per project.
///
/// A cell is 1 iff the declaration contains the invocation. Storage is
/// proportional to the number of distinct (declaration, invocation) pairs.
#[derive(Debug, Clone)]
pub struct RatingTensor {
    // first row of each project; one extra trailing entry
    project_rows: Vec<usize>,
    // first column entry of each row; one extra trailing entry
    row_ptr: Vec<usize>,
    cols: Vec<InvocationId>,
    vocabulary_size: usize,
}

impl RatingTensor {
    pub fn from_corpus(corpus: &Corpus) -> Self {
        let mut project_rows = Vec::with_capacity(corpus.len() + 1);
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        for project in corpus.projects() {
            project_rows.push(row_ptr.len() - 1);
            for decl in &project.declarations {
                cols.extend_from_slice(decl.invocation_set());
                row_ptr.push(cols.len());
            }
        }
        project_rows.push(row_ptr.len() - 1);
        Self {
            project_rows,
            row_ptr,
            cols,
            vocabulary_size: corpus.vocabulary().len(),
        }
    }

    fn row_index(&self, at: DeclRef) -> usize {
        let row = self.project_rows[at.project] + at.declaration;
        debug_assert!(row < self.project_rows[at.project + 1]);
        row
    }

    /// Sorted invocation ids rated 1 for the declaration.
    pub fn row(&self, at: DeclRef) -> &[InvocationId] {
        let r = self.row_index(at);
        &self.cols[self.row_ptr[r]..self.row_ptr[r + 1]]
    }

    pub fn rating(&self, at: DeclRef, id: InvocationId) -> u8 {
        u8::from(self.row(at).binary_search(&id).is_ok())
    }

    pub fn projects(&self) -> usize {
        self.project_rows.len() - 1
    }

    pub fn declarations_in(&self, project: usize) -> usize {
        self.project_rows[project + 1] - self.project_rows[project]
    }

    pub fn vocabulary_size(&self) -> usize {
        self.vocabulary_size
    }

    /// Number of stored (non-zero) cells.
    pub fn nnz(&self) -> usize {
        self.cols.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::CorpusBuilder;

    #[test]
    fn cells_match_declaration_sets() {
        let corpus = CorpusBuilder::new()
            .project("A", None)
            .declaration("m", &["a", "b", "a"])
            .declaration("n", &[])
            .project("B", None)
            .declaration("m", &["c", "a"])
            .build()
            .unwrap();
        let t = RatingTensor::from_corpus(&corpus);
        assert_eq!(t.projects(), 2);
        assert_eq!(t.declarations_in(0), 2);
        assert_eq!(t.nnz(), 4);
        let at = |p, d| DeclRef { project: p, declaration: d };
        assert_eq!(t.rating(at(0, 0), InvocationId(0)), 1);
        assert_eq!(t.rating(at(0, 0), InvocationId(2)), 0);
        assert!(t.row(at(0, 1)).is_empty());
        assert_eq!(t.row(at(1, 0)), &[InvocationId(0), InvocationId(2)]);
    }
}
