#include "chargeopt/mps.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <sstream>
#include <vector>

#include "chargeopt/errors.hpp"
#include "chargeopt/lp.hpp"
#include "chargeopt/util.hpp"

namespace chargeopt {

namespace {

constexpr const char* kObjRow = "OBJ";

std::string mps_name(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        if (c == '[' || c == ',') out.push_back('_');
        else if (c != ']') out.push_back(c);
    }
    return out;
}

std::string number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

char relation_tag(Relation rel) {
    switch (rel) {
        case Relation::LessEqual: return 'L';
        case Relation::GreaterEqual: return 'G';
        case Relation::Equal: return 'E';
    }
    return '?';
}

std::vector<std::string> tokens_of(const std::string& line) {
    std::vector<std::string> toks;
    std::istringstream in(line);
    std::string t;
    while (in >> t) toks.push_back(t);
    return toks;
}

} // namespace

std::string to_mps(const MipProblem& problem, const std::string& name) {
    std::size_t width = 8;
    for (const auto& var : problem.variables) width = std::max(width, mps_name(var.name).size());
    for (const auto& con : problem.constraints)
        width = std::max(width, mps_name(con.name).size());
    const int w = static_cast<int>(width) + 2;

    std::string out;
    char buf[256];
    auto emit = [&](const char* fmt, auto... args) {
        std::snprintf(buf, sizeof(buf), fmt, args...);
        out += buf;
    };

    emit("NAME          %s\n", name.c_str());
    out += "OBJSENSE\n    MAX\n";

    out += "ROWS\n";
    emit(" N  %s\n", kObjRow);
    for (const auto& con : problem.constraints)
        emit(" %c  %s\n", relation_tag(con.rel), mps_name(con.name).c_str());

    // Column-major view of the row-wise storage, preserving row order.
    std::vector<std::vector<std::pair<int, double>>> entries(problem.num_cols());
    for (int r = 0; r < problem.num_rows(); ++r) {
        const SparseRow& row = problem.constraints[r].row;
        for (std::size_t p = 0; p < row.size(); ++p)
            entries[row.cols[p]].push_back({r, row.vals[p]});
    }

    out += "COLUMNS\n";
    bool in_integer = false;
    int marker = 0;
    for (int j = 0; j < problem.num_cols(); ++j) {
        const bool integral = problem.variables[j].kind != VarKind::Continuous;
        if (integral != in_integer) {
            emit("    MARKER%04d  'MARKER'  '%s'\n", marker++, integral ? "INTORG" : "INTEND");
            in_integer = integral;
        }
        const std::string col = mps_name(problem.variables[j].name);
        if (problem.objective[j] != 0.0)
            emit("    %-*s%-*s%s\n", w, col.c_str(), w, kObjRow,
                 number(problem.objective[j]).c_str());
        for (const auto& [r, a] : entries[j])
            emit("    %-*s%-*s%s\n", w, col.c_str(), w,
                 mps_name(problem.constraints[r].name).c_str(), number(a).c_str());
    }
    if (in_integer) emit("    MARKER%04d  'MARKER'  'INTEND'\n", marker++);

    out += "RHS\n";
    if (problem.objective_constant != 0.0)
        emit("    %-*s%-*s%s\n", w, "RHS1", w, kObjRow,
             number(-problem.objective_constant).c_str());
    for (const auto& con : problem.constraints)
        if (con.rhs != 0.0)
            emit("    %-*s%-*s%s\n", w, "RHS1", w, mps_name(con.name).c_str(),
                 number(con.rhs).c_str());

    out += "BOUNDS\n";
    for (const auto& var : problem.variables) {
        const std::string col = mps_name(var.name);
        if (var.kind == VarKind::Binary && var.lower == 0.0 && var.upper == 1.0) {
            emit(" BV %-*s%s\n", w, "BND1", col.c_str());
            continue;
        }
        if (var.lower == var.upper) {
            emit(" FX %-*s%-*s%s\n", w, "BND1", w, col.c_str(), number(var.lower).c_str());
            continue;
        }
        if (var.lower == -kInfinity)
            emit(" MI %-*s%s\n", w, "BND1", col.c_str());
        else if (var.lower != 0.0)
            emit(" LO %-*s%-*s%s\n", w, "BND1", w, col.c_str(), number(var.lower).c_str());
        if (var.upper != kInfinity)
            emit(" UP %-*s%-*s%s\n", w, "BND1", w, col.c_str(), number(var.upper).c_str());
        else if (var.kind != VarKind::Continuous)
            emit(" PL %-*s%s\n", w, "BND1", col.c_str());
    }
    out += "ENDATA\n";
    return out;
}

MipProblem from_mps(const std::string& text) {
    MipProblem prob;
    enum class Section { None, ObjSense, Rows, Columns, Rhs, Ranges, Bounds, Done };
    Section section = Section::None;
    bool maximize = false;
    bool in_integer = false;
    std::string obj_row;
    std::map<std::string, int> row_of, col_of;

    auto parse_value = [](const std::string& tok, const std::string& where) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw SchemaError(where, "expected a number, got '" + tok + "'");
        }
        if (used != tok.size())
            throw SchemaError(where, "expected a number, got '" + tok + "'");
        return v;
    };
    auto column_index = [&](const std::string& name) {
        auto it = col_of.find(name);
        if (it != col_of.end()) return it->second;
        const int j = prob.num_cols();
        col_of[name] = j;
        MipVariable var;
        var.name = name;
        var.lower = 0.0;
        var.upper = kInfinity;
        var.kind = in_integer ? VarKind::Integer : VarKind::Continuous;
        prob.variables.push_back(std::move(var));
        prob.objective.push_back(0.0);
        return j;
    };
    auto row_index = [&](const std::string& name) {
        auto it = row_of.find(name);
        if (it == row_of.end()) throw SchemaError("mps.rows", "unknown row '" + name + "'");
        return it->second;
    };

    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '*') continue;
        const bool header = !std::isspace(static_cast<unsigned char>(line[0]));
        auto toks = tokens_of(line);
        if (toks.empty()) continue;

        if (header) {
            const std::string& head = toks[0];
            if (head == "NAME") section = Section::None;
            else if (head == "OBJSENSE") section = Section::ObjSense;
            else if (head == "ROWS") section = Section::Rows;
            else if (head == "COLUMNS") section = Section::Columns;
            else if (head == "RHS") section = Section::Rhs;
            else if (head == "RANGES") section = Section::Ranges;
            else if (head == "BOUNDS") section = Section::Bounds;
            else if (head == "ENDATA") section = Section::Done;
            else throw SchemaError("mps", "unknown section '" + head + "'");
            if (section == Section::Done) break;
            continue;
        }

        switch (section) {
            case Section::ObjSense: {
                if (toks[0] == "MAX" || toks[0] == "MAXIMIZE") maximize = true;
                else if (toks[0] == "MIN" || toks[0] == "MINIMIZE") maximize = false;
                else throw SchemaError("mps.objsense", "unknown sense '" + toks[0] + "'");
                break;
            }
            case Section::Rows: {
                if (toks.size() != 2) throw SchemaError("mps.rows", "expected 'type name'");
                const std::string& type = toks[0];
                const std::string& name = toks[1];
                if (type == "N") {
                    if (!obj_row.empty())
                        throw SchemaError("mps.rows", "multiple objective rows");
                    obj_row = name;
                    break;
                }
                MipConstraint con;
                con.name = name;
                if (type == "L") con.rel = Relation::LessEqual;
                else if (type == "G") con.rel = Relation::GreaterEqual;
                else if (type == "E") con.rel = Relation::Equal;
                else throw SchemaError("mps.rows", "unknown row type '" + type + "'");
                con.rhs = 0.0;
                if (!row_of.emplace(name, prob.num_rows()).second)
                    throw SchemaError("mps.rows", "duplicate row '" + name + "'");
                prob.constraints.push_back(std::move(con));
                break;
            }
            case Section::Columns: {
                if (toks.size() >= 3 && toks[1] == "'MARKER'") {
                    const std::string& tag = toks.back();
                    if (tag == "'INTORG'") in_integer = true;
                    else if (tag == "'INTEND'") in_integer = false;
                    else throw SchemaError("mps.columns", "unknown marker '" + tag + "'");
                    break;
                }
                if (toks.size() != 3 && toks.size() != 5)
                    throw SchemaError("mps.columns", "expected 'col row value [row value]'");
                const int j = column_index(toks[0]);
                for (std::size_t p = 1; p + 1 < toks.size(); p += 2) {
                    const double v = parse_value(toks[p + 1], "mps.columns");
                    if (toks[p] == obj_row) prob.objective[j] += v;
                    else prob.constraints[row_index(toks[p])].row.add(j, v);
                }
                break;
            }
            case Section::Rhs: {
                if (toks.size() != 3 && toks.size() != 5)
                    throw SchemaError("mps.rhs", "expected 'set row value [row value]'");
                for (std::size_t p = 1; p + 1 < toks.size(); p += 2) {
                    const double v = parse_value(toks[p + 1], "mps.rhs");
                    if (toks[p] == obj_row) prob.objective_constant = -v;
                    else prob.constraints[row_index(toks[p])].rhs = v;
                }
                break;
            }
            case Section::Ranges:
                throw SchemaError("mps.ranges", "ranged rows are not supported");
            case Section::Bounds: {
                const std::string& type = toks[0];
                const bool has_value = type == "UP" || type == "LO" || type == "FX" ||
                                       type == "UI" || type == "LI";
                if (toks.size() != (has_value ? 4u : 3u))
                    throw SchemaError("mps.bounds", "malformed bound line");
                auto it = col_of.find(toks[2]);
                if (it == col_of.end())
                    throw SchemaError("mps.bounds", "unknown column '" + toks[2] + "'");
                MipVariable& var = prob.variables[it->second];
                const double v = has_value ? parse_value(toks[3], "mps.bounds") : 0.0;
                if (type == "UP" || type == "UI") var.upper = v;
                else if (type == "LO" || type == "LI") var.lower = v;
                else if (type == "FX") var.lower = var.upper = v;
                else if (type == "FR") { var.lower = -kInfinity; var.upper = kInfinity; }
                else if (type == "MI") var.lower = -kInfinity;
                else if (type == "PL") var.upper = kInfinity;
                else if (type == "BV") { var.lower = 0.0; var.upper = 1.0; var.kind = VarKind::Binary; }
                else throw SchemaError("mps.bounds", "unknown bound type '" + type + "'");
                break;
            }
            case Section::None:
            case Section::Done:
                break;
        }
    }
    if (obj_row.empty()) throw SchemaError("mps.rows", "no objective row");

    if (!maximize) {
        for (double& c : prob.objective) c = -c;
        prob.objective_constant = -prob.objective_constant;
    }
    for (auto& var : prob.variables)
        if (var.kind == VarKind::Integer && var.lower >= 0.0 && var.upper <= 1.0)
            var.kind = VarKind::Binary;
    return prob;
}

void save_mps(const MipProblem& problem, const std::string& path) {
    write_text_file_atomic(path, to_mps(problem));
}

MipProblem load_mps(const std::string& path) { return from_mps(read_text_file(path)); }

} // namespace chargeopt
