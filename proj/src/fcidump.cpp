#include "sqdrift/hamiltonian.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

namespace sqdrift {

namespace {

[[noreturn]] void fail(const std::string& what) {
    throw std::runtime_error("fcidump: " + what);
}

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
    return s;
}

// header keys may be separated by commas, spaces, or newlines; values may be
// integer lists (only the scalar keys matter here)
struct Header {
    std::optional<int> norb, nelec, ms2;
};

bool header_terminator(const std::string& tok) {
    return tok == "&END" || tok == "$END" || tok == "/";
}

void parse_header_assignments(const std::string& text, Header& hdr) {
    std::string cleaned = text;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::istringstream in(cleaned);
    std::string tok;
    std::string pending_key;
    auto assign = [&](const std::string& key, const std::string& value) {
        if (key.empty()) return;
        long v = 0;
        try {
            v = std::stol(value);
        } catch (...) {
            return; // non-scalar keys (ORBSYM lists etc.) are ignored
        }
        if (key == "NORB") hdr.norb = static_cast<int>(v);
        else if (key == "NELEC") hdr.nelec = static_cast<int>(v);
        else if (key == "MS2") hdr.ms2 = static_cast<int>(v);
    };
    while (in >> tok) {
        tok = upper(tok);
        auto eq = tok.find('=');
        if (eq != std::string::npos) {
            const std::string key = tok.substr(0, eq);
            const std::string val = tok.substr(eq + 1);
            if (val.empty()) {
                pending_key = key;
            } else {
                assign(key, val);
                pending_key.clear();
            }
        } else if (!pending_key.empty()) {
            assign(pending_key, tok);
            pending_key.clear();
        } else if (!tok.empty() && tok.back() == '=') {
            pending_key = tok.substr(0, tok.size() - 1);
        }
    }
}

double parse_value(std::string tok, int record) {
    // Fortran D exponents
    for (auto& c : tok)
        if (c == 'D' || c == 'd') c = 'E';
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &used);
    } catch (...) {
        fail("record " + std::to_string(record) + ": bad value '" + tok + "'");
    }
    if (used != tok.size()) fail("record " + std::to_string(record) + ": bad value '" + tok + "'");
    return v;
}

int parse_index(const std::string& tok, int record) {
    std::size_t used = 0;
    long v = 0;
    try {
        v = std::stol(tok, &used);
    } catch (...) {
        fail("record " + std::to_string(record) + ": bad index '" + tok + "'");
    }
    if (used != tok.size() || v < 0)
        fail("record " + std::to_string(record) + ": bad index '" + tok + "'");
    return static_cast<int>(v);
}

} // namespace

MolecularHamiltonian parse_fcidump(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) fail("empty input");
    {
        const auto first = upper(line);
        if (first.find("&FCI") == std::string::npos && first.find("$FCI") == std::string::npos)
            fail("missing &FCI header");
    }

    Header hdr;
    std::string header_text = line;
    bool terminated = false;
    // the opening line may already carry the terminator
    {
        std::istringstream probe(upper(line));
        std::string tok;
        while (probe >> tok)
            if (header_terminator(tok)) terminated = true;
    }
    while (!terminated && std::getline(in, line)) {
        std::istringstream probe(upper(line));
        std::string tok;
        std::string kept;
        while (probe >> tok) {
            if (header_terminator(tok)) {
                terminated = true;
                break;
            }
            kept += tok;
            kept += ' ';
        }
        header_text += ' ';
        header_text += kept;
    }
    if (!terminated) fail("header never terminated (&END or / expected)");
    parse_header_assignments(header_text, hdr);

    if (!hdr.norb) fail("header missing NORB");
    if (!hdr.nelec) fail("header missing NELEC");
    const int norb = *hdr.norb;
    const int nelec = *hdr.nelec;
    const int ms2 = hdr.ms2.value_or(0);
    if (norb < 1 || norb > 32) fail("NORB out of supported range [1, 32]");
    if (nelec < 0 || nelec > 2 * norb) fail("NELEC out of range");
    if ((nelec + ms2) % 2 != 0) fail("NELEC and MS2 have incompatible parity");
    const int na = (nelec + ms2) / 2;
    const int nb = (nelec - ms2) / 2;
    if (na < 0 || nb < 0 || na > norb || nb > norb) fail("electron counts out of range");

    MolecularHamiltonian h;
    h.allocate(norb);
    h.n_alpha = na;
    h.n_beta = nb;

    int record = 0;
    while (std::getline(in, line)) {
        std::istringstream fields(line);
        std::string vtok;
        if (!(fields >> vtok)) continue; // blank line
        ++record;
        std::string itok, jtok, ktok, ltok;
        if (!(fields >> itok >> jtok >> ktok >> ltok))
            fail("record " + std::to_string(record) + ": expected 'value i j k l'");
        std::string extra;
        if (fields >> extra) fail("record " + std::to_string(record) + ": trailing fields");
        const double v = parse_value(vtok, record);
        const int i = parse_index(itok, record);
        const int j = parse_index(jtok, record);
        const int k = parse_index(ktok, record);
        const int l = parse_index(ltok, record);
        for (int idx : {i, j, k, l})
            if (idx > norb) fail("record " + std::to_string(record) + ": orbital index exceeds NORB");

        if (i == 0 && j == 0 && k == 0 && l == 0) {
            h.e_core = v;
        } else if (k == 0 && l == 0) {
            if (i > 0 && j > 0) {
                h.set_h1(i - 1, j - 1, v);
            } else if (i > 0 && j == 0) {
                // orbital-energy record from some writers; not part of the
                // Hamiltonian
            } else {
                fail("record " + std::to_string(record) + ": bad one-body indices");
            }
        } else if (i > 0 && j > 0 && k > 0 && l > 0) {
            h.set_eri(i - 1, j - 1, k - 1, l - 1, v);
        } else {
            fail("record " + std::to_string(record) + ": bad index pattern");
        }
    }
    return h;
}

MolecularHamiltonian parse_fcidump_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open '" + path + "'");
    return parse_fcidump(in);
}

} // namespace sqdrift
