# distutils: language = c++
# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled incremental echelon basis (GMP integers); see _echelon_py."""

from libcpp cimport bool as cbool
from libcpp.vector cimport vector
from libcpp.utility cimport move
from libc.stdlib cimport free


cdef extern from "gmp.h":
    ctypedef struct __mpz_struct:
        pass
    ctypedef __mpz_struct* mpz_ptr
    ctypedef const __mpz_struct* mpz_srcptr
    int mpz_fits_slong_p(mpz_srcptr)
    long mpz_get_si(mpz_srcptr)
    char* mpz_get_str(char*, int, mpz_srcptr)
    void mpz_set_si(mpz_ptr, long)
    int mpz_set_str(mpz_ptr, const char*, int)
    size_t mpz_sizeinbase(mpz_srcptr, int)


cdef extern from "gmpxx.h":
    cdef cppclass mpz_class:
        mpz_class()
        mpz_class(long)
        mpz_ptr get_mpz_t()
    cdef cppclass mpq_class:
        mpq_class()
        mpz_class& get_num()
        mpz_class& get_den()


cdef extern from "_echelon_core.hpp" namespace "symfer":
    cdef struct Entry:
        int col
        mpz_class val
    cdef cppclass EchelonCore:
        EchelonCore(int)
        int ncols()
        int rank()
        cbool is_pivot(int)
        cbool add(vector[Entry]) except +
        cbool contains(vector[Entry]) except +
        void reduce(vector[Entry]&, mpq_class&) except +
        const vector[Entry]& row_of_col(int)


cdef long _SMALL = 1 << 62


cdef inline void _set(mpz_class& z, object v) except *:
    if -_SMALL < v < _SMALL:
        mpz_set_si(z.get_mpz_t(), <long>v)
    else:
        s = format(v, "x").encode()
        mpz_set_str(z.get_mpz_t(), s, 16)


cdef object _get(mpz_class& z):
    cdef char* buf
    if mpz_fits_slong_p(z.get_mpz_t()):
        return mpz_get_si(z.get_mpz_t())
    s = mpz_get_str(NULL, 16, z.get_mpz_t())
    try:
        return int((<bytes>s).decode(), 16)
    finally:
        free(s)


cdef class Echelon:
    cdef EchelonCore* core
    cdef public int ncols
    backend = "compiled"

    def __cinit__(self, int ncols):
        self.core = new EchelonCore(ncols)
        self.ncols = ncols

    def __dealloc__(self):
        del self.core

    @property
    def rank(self):
        return self.core.rank()

    def is_full(self):
        return self.core.rank() == self.ncols

    def pivot_columns(self):
        return [c for c in range(self.ncols) if self.core.is_pivot(c)]

    def pivot_rows(self):
        out = []
        cdef vector[Entry]* r
        cdef size_t k
        for c in range(self.ncols):
            if self.core.is_pivot(c):
                r = <vector[Entry]*>&self.core.row_of_col(c)
                ks = []
                vs = []
                for k in range(r.size()):
                    ks.append(r[0][k].col)
                    vs.append(_get(r[0][k].val))
                out.append((ks, vs))
        return out

    cdef vector[Entry] _row(self, cols, vals) except *:
        cdef vector[Entry] row
        cdef Entry e
        cdef int c, prev = -1
        row.reserve(len(cols))
        for c, v in zip(cols, vals):
            if c < 0 or c >= self.ncols:
                raise IndexError(f"column {c} outside 0..{self.ncols - 1}")
            if c <= prev:
                raise ValueError("columns must be strictly increasing")
            prev = c
            if v:
                e.col = c
                _set(e.val, v)
                row.push_back(e)
        return row

    def add(self, cols, vals):
        return self.core.add(move(self._row(cols, vals)))

    def contains(self, cols, vals):
        return self.core.contains(move(self._row(cols, vals)))

    def reduce(self, cols, vals):
        cdef vector[Entry] row = self._row(cols, vals)
        cdef mpq_class scale
        cdef size_t k
        self.core.reduce(row, scale)
        ks = []
        vs = []
        for k in range(row.size()):
            ks.append(row[k].col)
            vs.append(_get(row[k].val))
        return ks, vs, _get(scale.get_num()), _get(scale.get_den())
