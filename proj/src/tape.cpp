#include "modnet/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace modnet {

Var Tape::push(Matrix value, BackFn back, Param* param) {
    nodes_.push_back(Node{std::move(value), Matrix{}, std::move(back), param});
    return Var{static_cast<int>(nodes_.size()) - 1};
}

const Tape::Node& Tape::node(Var v, const char* who) const {
    if (!v.valid() || static_cast<std::size_t>(v.idx) >= nodes_.size()) {
        throw std::invalid_argument(std::string(who) + ": value not on tape");
    }
    return nodes_[static_cast<std::size_t>(v.idx)];
}

const Matrix& Tape::value(Var v) const { return node(v, "value").value; }

double Tape::scalar(Var v) const {
    const Matrix& m = node(v, "scalar").value;
    if (m.rows != 1 || m.cols != 1) throw std::invalid_argument("scalar: shape " + m.shape_str() + " is not 1x1");
    return m.at(0, 0);
}

const Matrix& Tape::grad(Var v) const { return node(v, "grad").grad; }

Var Tape::constant(Matrix m) {
    if (!m.all_finite()) throw std::invalid_argument("constant: non-finite entries");
    return push(std::move(m), nullptr);
}

Var Tape::leaf(Param& p) {
    auto it = leaf_cache_.find(&p);
    if (it != leaf_cache_.end()) return Var{it->second};
    if (!p.value.all_finite()) throw std::invalid_argument("leaf: non-finite entries in parameter " + p.name);
    Var v = push(p.value, nullptr, &p);
    leaf_cache_.emplace(&p, v.idx);
    return v;
}

Var Tape::matmul(Var a, Var b) {
    const Matrix& A = node(a, "matmul").value;
    const Matrix& B = node(b, "matmul").value;
    if (A.cols != B.rows) {
        throw std::invalid_argument("matmul: inner dimensions differ: " + A.shape_str() + " * " + B.shape_str());
    }
    Matrix C(A.rows, B.cols);
    for (int i = 0; i < A.rows; ++i) {
        for (int k = 0; k < A.cols; ++k) {
            const double aik = A.at(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < B.cols; ++j) C.at(i, j) += aik * B.at(k, j);
        }
    }
    const int ai = a.idx, bi = b.idx;
    const int oi = static_cast<int>(nodes_.size());
    return push(std::move(C), [ai, bi, oi](Tape& t) {
        const Matrix& A = t.val(ai);
        const Matrix& B = t.val(bi);
        const Matrix& dC = t.grad_slot(oi);
        Matrix& dA = t.grad_slot(ai);
        Matrix& dB = t.grad_slot(bi);
        // dA += dC B^T, dB += A^T dC
        for (int i = 0; i < A.rows; ++i) {
            for (int j = 0; j < B.cols; ++j) {
                const double g = dC.at(i, j);
                if (g == 0.0) continue;
                for (int k = 0; k < A.cols; ++k) {
                    dA.at(i, k) += g * B.at(k, j);
                    dB.at(k, j) += g * A.at(i, k);
                }
            }
        }
    });
}

Var Tape::add(Var a, Var b) {
    const Matrix& A = node(a, "add").value;
    const Matrix& B = node(b, "add").value;
    const bool broadcast = !A.same_shape(B);
    if (broadcast && !(B.rows == 1 && B.cols == A.cols)) {
        throw std::invalid_argument("add: shape mismatch " + A.shape_str() + " vs " + B.shape_str());
    }
    Matrix C = A;
    for (int i = 0; i < C.rows; ++i) {
        for (int j = 0; j < C.cols; ++j) C.at(i, j) += B.at(broadcast ? 0 : i, j);
    }
    const int ai = a.idx, bi = b.idx;
    const int oi = static_cast<int>(nodes_.size());
    return push(std::move(C), [ai, bi, oi, broadcast](Tape& t) {
        const Matrix& dC = t.grad_slot(oi);
        Matrix& dA = t.grad_slot(ai);
        Matrix& dB = t.grad_slot(bi);
        for (int i = 0; i < dC.rows; ++i) {
            for (int j = 0; j < dC.cols; ++j) {
                dA.at(i, j) += dC.at(i, j);
                dB.at(broadcast ? 0 : i, j) += dC.at(i, j);
            }
        }
    });
}

Var Tape::sub(Var a, Var b) {
    const Matrix& A = node(a, "sub").value;
    const Matrix& B = node(b, "sub").value;
    if (!A.same_shape(B)) {
        throw std::invalid_argument("sub: shape mismatch " + A.shape_str() + " vs " + B.shape_str());
    }
    Matrix C = A;
    for (int i = 0; i < C.size(); ++i) C.data[i] -= B.data[i];
    const int ai = a.idx, bi = b.idx;
    const int oi = static_cast<int>(nodes_.size());
    return push(std::move(C), [ai, bi, oi](Tape& t) {
        const Matrix& dC = t.grad_slot(oi);
        Matrix& dA = t.grad_slot(ai);
        Matrix& dB = t.grad_slot(bi);
        for (int i = 0; i < dC.size(); ++i) {
            dA.data[i] += dC.data[i];
            dB.data[i] -= dC.data[i];
        }
    });
}

Var Tape::mul(Var a, Var b) {
    const Matrix& A = node(a, "mul").value;
    const Matrix& B = node(b, "mul").value;
    if (!A.same_shape(B)) {
        throw std::invalid_argument("mul: shape mismatch " + A.shape_str() + " vs " + B.shape_str());
    }
    Matrix C = A;
    for (int i = 0; i < C.size(); ++i) C.data[i] *= B.data[i];
    const int ai = a.idx, bi = b.idx;
    const int oi = static_cast<int>(nodes_.size());
    return push(std::move(C), [ai, bi, oi](Tape& t) {
        const Matrix& A = t.val(ai);
        const Matrix& B = t.val(bi);
        const Matrix& dC = t.grad_slot(oi);
        Matrix& dA = t.grad_slot(ai);
        Matrix& dB = t.grad_slot(bi);
        for (int i = 0; i < dC.size(); ++i) {
            dA.data[i] += dC.data[i] * B.data[i];
            dB.data[i] += dC.data[i] * A.data[i];
        }
    });
}

Var Tape::sigmoid(Var a) {
    const Matrix& A = node(a, "sigmoid").value;
    Matrix C = A;
    for (double& v : C.data) v = 1.0 / (1.0 + std::exp(-v));
    const int ai = a.idx;
    const int oi = static_cast<int>(nodes_.size());
    return push(std::move(C), [ai, oi](Tape& t) {
        const Matrix& Y = t.val(oi);
        const Matrix& dC = t.grad_slot(oi);
        Matrix& dA = t.grad_slot(ai);
        for (int i = 0; i < dC.size(); ++i) {
            const double y = Y.data[i];
            dA.data[i] += dC.data[i] * y * (1.0 - y);
        }
    });
}

Var Tape::tanh(Var a) {
    const Matrix& A = node(a, "tanh").value;
    Matrix C = A;
    for (double& v : C.data) v = std::tanh(v);
    const int ai = a.idx;
    const int oi = static_cast<int>(nodes_.size());
    return push(std::move(C), [ai, oi](Tape& t) {
        const Matrix& Y = t.val(oi);
        const Matrix& dC = t.grad_slot(oi);
        Matrix& dA = t.grad_slot(ai);
        for (int i = 0; i < dC.size(); ++i) {
            const double y = Y.data[i];
            dA.data[i] += dC.data[i] * (1.0 - y * y);
        }
    });
}

Var Tape::log(Var a) {
    const Matrix& A = node(a, "log").value;
    Matrix C = A;
    for (double& v : C.data) {
        if (v <= 0.0) throw std::domain_error("log: non-positive entry");
        v = std::log(v);
    }
    const int ai = a.idx;
    const int oi = static_cast<int>(nodes_.size());
    return push(std::move(C), [ai, oi](Tape& t) {
        const Matrix& A = t.val(ai);
        const Matrix& dC = t.grad_slot(oi);
        Matrix& dA = t.grad_slot(ai);
        for (int i = 0; i < dC.size(); ++i) dA.data[i] += dC.data[i] / A.data[i];
    });
}

Var Tape::softmax_rows(Var a) {
    const Matrix& A = node(a, "softmax_rows").value;
    Matrix C(A.rows, A.cols);
    for (int i = 0; i < A.rows; ++i) {
        double mx = A.at(i, 0);
        for (int j = 1; j < A.cols; ++j) mx = std::max(mx, A.at(i, j));
        double total = 0.0;
        for (int j = 0; j < A.cols; ++j) {
            const double e = std::exp(A.at(i, j) - mx);
            C.at(i, j) = e;
            total += e;
        }
        for (int j = 0; j < A.cols; ++j) C.at(i, j) /= total;
    }
    const int ai = a.idx;
    const int oi = static_cast<int>(nodes_.size());
    return push(std::move(C), [ai, oi](Tape& t) {
        const Matrix& Y = t.val(oi);
        const Matrix& dC = t.grad_slot(oi);
        Matrix& dA = t.grad_slot(ai);
        // per row: dx = y * (dy - <dy, y>)
        for (int i = 0; i < Y.rows; ++i) {
            double dot = 0.0;
            for (int j = 0; j < Y.cols; ++j) dot += dC.at(i, j) * Y.at(i, j);
            for (int j = 0; j < Y.cols; ++j) dA.at(i, j) += Y.at(i, j) * (dC.at(i, j) - dot);
        }
    });
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_rows: no parts");
    const int cols = node(parts[0], "concat_rows").value.cols;
    int rows = 0;
    for (Var p : parts) {
        const Matrix& m = node(p, "concat_rows").value;
        if (m.cols != cols) {
            throw std::invalid_argument("concat_rows: column mismatch " + m.shape_str() + " vs " +
                                        node(parts[0], "concat_rows").value.shape_str());
        }
        rows += m.rows;
    }
    Matrix C(rows, cols);
    int r = 0;
    for (Var p : parts) {
        const Matrix& m = val(p.idx);
        for (int i = 0; i < m.rows; ++i) {
            for (int j = 0; j < cols; ++j) C.at(r + i, j) = m.at(i, j);
        }
        r += m.rows;
    }
    std::vector<int> idxs;
    idxs.reserve(parts.size());
    for (Var p : parts) idxs.push_back(p.idx);
    const int oi = static_cast<int>(nodes_.size());
    return push(std::move(C), [idxs, oi](Tape& t) {
        const Matrix& dC = t.grad_slot(oi);
        int r = 0;
        for (int pi : idxs) {
            Matrix& dP = t.grad_slot(pi);
            for (int i = 0; i < dP.rows; ++i) {
                for (int j = 0; j < dP.cols; ++j) dP.at(i, j) += dC.at(r + i, j);
            }
            r += dP.rows;
        }
    });
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: no parts");
    const int rows = node(parts[0], "concat_cols").value.rows;
    int cols = 0;
    for (Var p : parts) {
        const Matrix& m = node(p, "concat_cols").value;
        if (m.rows != rows) {
            throw std::invalid_argument("concat_cols: row mismatch " + m.shape_str() + " vs " +
                                        node(parts[0], "concat_cols").value.shape_str());
        }
        cols += m.cols;
    }
    Matrix C(rows, cols);
    int c = 0;
    for (Var p : parts) {
        const Matrix& m = val(p.idx);
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < m.cols; ++j) C.at(i, c + j) = m.at(i, j);
        }
        c += m.cols;
    }
    std::vector<int> idxs;
    idxs.reserve(parts.size());
    for (Var p : parts) idxs.push_back(p.idx);
    const int oi = static_cast<int>(nodes_.size());
    return push(std::move(C), [idxs, oi](Tape& t) {
        const Matrix& dC = t.grad_slot(oi);
        int c = 0;
        for (int pi : idxs) {
            Matrix& dP = t.grad_slot(pi);
            for (int i = 0; i < dP.rows; ++i) {
                for (int j = 0; j < dP.cols; ++j) dP.at(i, j) += dC.at(i, c + j);
            }
            c += dP.cols;
        }
    });
}

Var Tape::transpose(Var a) {
    const Matrix& A = node(a, "transpose").value;
    Matrix C(A.cols, A.rows);
    for (int i = 0; i < A.rows; ++i) {
        for (int j = 0; j < A.cols; ++j) C.at(j, i) = A.at(i, j);
    }
    const int ai = a.idx;
    const int oi = static_cast<int>(nodes_.size());
    return push(std::move(C), [ai, oi](Tape& t) {
        const Matrix& dC = t.grad_slot(oi);
        Matrix& dA = t.grad_slot(ai);
        for (int i = 0; i < dC.rows; ++i) {
            for (int j = 0; j < dC.cols; ++j) dA.at(j, i) += dC.at(i, j);
        }
    });
}

Var Tape::scale(Var a, double c) {
    if (!std::isfinite(c)) throw std::invalid_argument("scale: non-finite factor");
    const Matrix& A = node(a, "scale").value;
    Matrix C = A;
    for (double& v : C.data) v *= c;
    const int ai = a.idx;
    const int oi = static_cast<int>(nodes_.size());
    return push(std::move(C), [ai, oi, c](Tape& t) {
        const Matrix& dC = t.grad_slot(oi);
        Matrix& dA = t.grad_slot(ai);
        for (int i = 0; i < dC.size(); ++i) dA.data[i] += c * dC.data[i];
    });
}

Var Tape::sum(Var a) {
    const Matrix& A = node(a, "sum").value;
    double total = 0.0;
    for (double v : A.data) total += v;
    const int ai = a.idx;
    const int oi = static_cast<int>(nodes_.size());
    return push(Matrix(1, 1, {total}), [ai, oi](Tape& t) {
        const double g = t.grad_slot(oi).at(0, 0);
        Matrix& dA = t.grad_slot(ai);
        for (int i = 0; i < dA.size(); ++i) dA.data[i] += g;
    });
}

Var Tape::clamp(Var a, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("clamp: empty interval");
    const Matrix& A = node(a, "clamp").value;
    Matrix C = A;
    for (double& v : C.data) v = std::min(hi, std::max(lo, v));
    const int ai = a.idx;
    const int oi = static_cast<int>(nodes_.size());
    return push(std::move(C), [ai, oi, lo, hi](Tape& t) {
        const Matrix& A = t.val(ai);
        const Matrix& dC = t.grad_slot(oi);
        Matrix& dA = t.grad_slot(ai);
        for (int i = 0; i < dC.size(); ++i) {
            if (A.data[i] > lo && A.data[i] < hi) dA.data[i] += dC.data[i];
        }
    });
}

Var Tape::select_row(Var a, int i) {
    const Matrix& A = node(a, "select_row").value;
    if (i < 0 || i >= A.rows) {
        throw std::invalid_argument("select_row: row " + std::to_string(i) + " out of range for " + A.shape_str());
    }
    Matrix C(1, A.cols);
    for (int j = 0; j < A.cols; ++j) C.at(0, j) = A.at(i, j);
    const int ai = a.idx;
    const int oi = static_cast<int>(nodes_.size());
    return push(std::move(C), [ai, oi, i](Tape& t) {
        const Matrix& dC = t.grad_slot(oi);
        Matrix& dA = t.grad_slot(ai);
        for (int j = 0; j < dC.cols; ++j) dA.at(i, j) += dC.at(0, j);
    });
}

void Tape::backward(Var loss) {
    const Node& L = node(loss, "backward");
    if (L.value.rows != 1 || L.value.cols != 1) {
        throw std::invalid_argument("backward: loss has shape " + L.value.shape_str() + ", expected 1x1");
    }
    for (Node& n : nodes_) n.grad = Matrix::zeros(n.value.rows, n.value.cols);
    nodes_[static_cast<std::size_t>(loss.idx)].grad.at(0, 0) = 1.0;
    for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
        Node& n = nodes_[static_cast<std::size_t>(i)];
        if (n.back) n.back(*this);
    }
    for (Node& n : nodes_) {
        if (!n.param) continue;
        for (int i = 0; i < n.grad.size(); ++i) n.param->grad.data[i] += n.grad.data[i];
    }
}

}  // namespace modnet
