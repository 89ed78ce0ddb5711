// Sparse fraction-free echelon basis over Q, backed by GMP integers.
// Mirrors symfer/_echelon_py.py exactly: primitive integer rows with a
// positive leading entry, elimination w <- a*w - b*p, content removal.
#pragma once

#include <gmpxx.h>

#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

namespace symfer {

struct Entry {
    int col;
    mpz_class val;
};
using Row = std::vector<Entry>;

class EchelonCore {
  public:
    explicit EchelonCore(int ncols) : ncols_(ncols), slot_(ncols, -1) {}

    int ncols() const { return ncols_; }
    int rank() const { return static_cast<int>(rows_.size()); }
    bool is_pivot(int col) const { return slot_[col] >= 0; }

    // Insert a sorted row; true iff the span grew.
    bool add(Row w) {
        while (!w.empty()) {
            int c = w.front().col;
            int s = slot_[c];
            if (s < 0) {
                make_primitive(w);
                slot_[c] = static_cast<int>(rows_.size());
                rows_.push_back(std::move(w));
                return true;
            }
            eliminate(w, rows_[s], nullptr);
        }
        return false;
    }

    bool contains(Row w) const {
        while (!w.empty()) {
            int s = slot_[w.front().col];
            if (s < 0) return false;
            eliminate(w, rows_[s], nullptr);
        }
        return true;
    }

    // Full normal form; residual_true = w / scale.
    void reduce(Row &w, mpq_class &scale) const {
        scale = 1;
        // scan columns left to right; elimination only introduces later columns
        std::size_t i = 0;
        while (i < w.size()) {
            int c = w[i].col;
            int s = slot_[c];
            if (s < 0) {
                ++i;
                continue;
            }
            eliminate_at(w, i, rows_[s], &scale);
            // entries before i are untouched, entry i was cancelled
        }
    }

    const Row &row_of_col(int col) const { return rows_[slot_[col]]; }
    const std::vector<Row> &rows() const { return rows_; }

  private:
    int ncols_;
    std::vector<int> slot_;
    std::vector<Row> rows_;

    static void make_primitive(Row &w) {
        mpz_class g = 0;
        for (auto &e : w) {
            mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), e.val.get_mpz_t());
            if (g == 1) break;
        }
        if (w.front().val < 0) g = -g;
        if (g != 1) {
            for (auto &e : w) mpz_divexact(e.val.get_mpz_t(), e.val.get_mpz_t(), g.get_mpz_t());
        }
    }

    static void remove_content(Row &w, mpq_class *scale) {
        if (w.empty()) return;
        mpz_class g = 0;
        for (auto &e : w) {
            mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), e.val.get_mpz_t());
            if (g == 1) return;
        }
        for (auto &e : w) mpz_divexact(e.val.get_mpz_t(), e.val.get_mpz_t(), g.get_mpz_t());
        if (scale) {
            *scale /= g;
        }
    }

    // Eliminate the leading entry of w with pivot row p (same leading column).
    static void eliminate(Row &w, const Row &p, mpq_class *scale) { eliminate_at(w, 0, p, scale); }

    // Eliminate entry w[pos] with pivot row p whose leading column equals w[pos].col.
    static void eliminate_at(Row &w, std::size_t pos, const Row &p, mpq_class *scale) {
        mpz_class a = p.front().val;
        mpz_class b = w[pos].val;
        mpz_class g;
        mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
        if (g != 1) {
            mpz_divexact(a.get_mpz_t(), a.get_mpz_t(), g.get_mpz_t());
            mpz_divexact(b.get_mpz_t(), b.get_mpz_t(), g.get_mpz_t());
        }
        const bool scale_w = (a != 1);
        Row out;
        out.reserve(w.size() + p.size());
        for (std::size_t k = 0; k < pos; ++k) {
            out.push_back(std::move(w[k]));
            if (scale_w) out.back().val *= a;
        }
        std::size_t i = pos, j = 0;
        mpz_class t;
        while (i < w.size() || j < p.size()) {
            if (j >= p.size() || (i < w.size() && w[i].col < p[j].col)) {
                out.push_back(std::move(w[i]));
                if (scale_w) out.back().val *= a;
                ++i;
            } else if (i >= w.size() || p[j].col < w[i].col) {
                t = p[j].val * b;
                out.push_back(Entry{p[j].col, -t});
                ++j;
            } else {
                if (scale_w) {
                    t = w[i].val * a;
                } else {
                    t = w[i].val;
                }
                t -= b * p[j].val;
                if (t != 0) out.push_back(Entry{w[i].col, t});
                ++i;
                ++j;
            }
        }
        w.swap(out);
        if (scale && scale_w) *scale *= a;
        remove_content(w, scale);
    }
};

}  // namespace symfer
