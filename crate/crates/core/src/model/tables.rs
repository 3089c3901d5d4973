use crate::expr::{BoolTableId, ElemTableId, EvalError, NumTableId, Set, SetTableId};

/// A dense table indexed by one to three element indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Table<T> {
    pub name: String,
    dims: Vec<usize>,
    data: Vec<T>,
}

impl<T> Table<T> {
    pub fn new(name: impl Into<String>, dims: Vec<usize>, data: Vec<T>) -> Result<Self, String> {
        let name = name.into();
        if dims.is_empty() || dims.len() > 3 {
            return Err(format!("table `{name}` must have 1 to 3 dimensions"));
        }
        let size: usize = dims.iter().product();
        if size != data.len() {
            return Err(format!(
                "table `{name}` has dimensions {dims:?} but {} entries",
                data.len()
            ));
        }
        Ok(Table { name, dims, data })
    }

    pub fn arity(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn get(&self, index: &[usize]) -> Result<&T, EvalError> {
        let mut flat = 0;
        for (&i, &d) in index.iter().zip(&self.dims) {
            if i >= d {
                return Err(EvalError::IndexOutOfRange {
                    table: self.name.clone(),
                    index: index.to_vec(),
                });
            }
            flat = flat * d + i;
        }
        Ok(&self.data[flat])
    }
}

/// Read-only instance data referenced by expressions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tables {
    pub(crate) numeric: Vec<Table<f64>>,
    pub(crate) element: Vec<Table<usize>>,
    pub(crate) set: Vec<Table<Set>>,
    pub(crate) boolean: Vec<Table<bool>>,
}

impl Tables {
    pub fn numeric(&self, id: NumTableId, index: &[usize]) -> Result<f64, EvalError> {
        self.numeric[id.0].get(index).copied()
    }

    pub fn element(&self, id: ElemTableId, index: &[usize]) -> Result<usize, EvalError> {
        self.element[id.0].get(index).copied()
    }

    pub fn set(&self, id: SetTableId, index: &[usize]) -> Result<&Set, EvalError> {
        self.set[id.0].get(index)
    }

    pub fn boolean(&self, id: BoolTableId, index: &[usize]) -> Result<bool, EvalError> {
        self.boolean[id.0].get(index).copied()
    }

    pub fn numeric_arity(&self, id: NumTableId) -> Option<usize> {
        self.numeric.get(id.0).map(Table::arity)
    }

    pub fn element_arity(&self, id: ElemTableId) -> Option<usize> {
        self.element.get(id.0).map(Table::arity)
    }

    pub fn set_arity(&self, id: SetTableId) -> Option<usize> {
        self.set.get(id.0).map(Table::arity)
    }

    pub fn boolean_arity(&self, id: BoolTableId) -> Option<usize> {
        self.boolean.get(id.0).map(Table::arity)
    }

    /// Largest universe among the entries of a set table.
    pub fn set_universe(&self, id: SetTableId) -> usize {
        self.set
            .get(id.0)
            .map(|t| t.data.iter().map(Set::universe).max().unwrap_or(0))
            .unwrap_or(0)
    }

    /// Mutable access used to re-inject duals without rebuilding a model.
    pub fn numeric_table_mut(&mut self, id: NumTableId) -> &mut Table<f64> {
        &mut self.numeric[id.0]
    }
}

impl Table<f64> {
    pub fn set_value(&mut self, index: &[usize], value: f64) -> Result<(), EvalError> {
        let mut flat = 0;
        for (&i, &d) in index.iter().zip(&self.dims) {
            if i >= d {
                return Err(EvalError::IndexOutOfRange {
                    table: self.name.clone(),
                    index: index.to_vec(),
                });
            }
            flat = flat * d + i;
        }
        self.data[flat] = value;
        Ok(())
    }
}
