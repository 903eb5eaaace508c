#include <algorithm>

#include "machine.hpp"

namespace pir {

namespace {

const std::string& name_arg(const Value& v, const char* fn) {
    if (v.kind != Value::Kind::Vec || v.vec->type != Vec::Type::String || v.vec->size() != 1)
        raise(ErrorKind::TypeError, std::string(fn) + ": invalid name argument");
    return v.vec->str[0];
}

std::string element_text(const Vec& v, size_t i) {
    switch (v.type) {
        case Vec::Type::String: return v.str[i];
        case Vec::Type::Logical: return v.num[i] != 0 ? "TRUE" : "FALSE";
        default: return mr::format_double(v.num[i]);
    }
}

Value concat(const std::vector<Value>& args) {
    Vec::Type t = Vec::Type::Null;
    for (auto& a : args) {
        if (a.kind == Value::Kind::Missing) raise(ErrorKind::MissingArgumentUsed, "argument is missing");
        if (a.kind != Value::Kind::Vec) raise(ErrorKind::TypeError, "c: cannot combine non-vector values");
        t = std::max(t, a.vec->type);
    }
    Vec r;
    r.type = t;
    for (auto& a : args) {
        const Vec& v = *a.vec;
        for (size_t i = 0; i < v.size(); ++i) {
            if (t == Vec::Type::String)
                r.str.push_back(element_text(v, i));
            else
                r.num.push_back(v.num[i]);
        }
    }
    return Value::of(std::move(r));
}

}  // namespace

void Machine::trace_builtin(const std::string& name, const std::vector<Value>& args, const Value& result) {
    std::string s = "EVT builtin " + name + "(";
    for (size_t i = 0; i < args.size(); ++i) {
        if (i) s += ", ";
        s += format_value(args[i]);
    }
    s += ") -> " + format_value(result);
    trace_.push_back(std::move(s));
}

Value Machine::call_builtin(mr::BuiltinId id, std::vector<Value>& args, EnvObj* eval_env) {
    const mr::BuiltinDesc* desc = nullptr;
    for (auto& b : mr::builtin_table())
        if (b.id == id) desc = &b;
    if (desc->arity >= 0 && static_cast<int>(args.size()) != desc->arity)
        raise(ErrorKind::ArityMismatch, desc->name + " expects " + std::to_string(desc->arity) + " arguments");
    for (auto& a : args)
        if (a.kind == Value::Kind::Missing) raise(ErrorKind::MissingArgumentUsed, "argument is missing");

    Value result = Value::of(Vec::null());
    switch (id) {
        case mr::BuiltinId::C:
            result = concat(args);
            break;
        case mr::BuiltinId::Get: {
            const std::string& name = name_arg(args[0], "get");
            EnvObj* e = env_of(args[1], "get: envir");
            Binding* b = nullptr;
            for (EnvObj* s = e; s && !b; s = s->parent) b = s->find(name);
            if (!b) raise(ErrorKind::UnboundVariable, "object '" + name + "' not found");
            result = force(b->value);
            break;
        }
        case mr::BuiltinId::Assign: {
            const std::string& name = name_arg(args[0], "assign");
            EnvObj* e = env_of(args[2], "assign: envir");
            materialize(e);
            if (Binding* b = e->find(name)) {
                b->value = args[1];
                b->writer_code = nullptr;
                b->writer_loc = -1;
            } else {
                e->bindings.push_back(Binding{name, args[1]});
            }
            result = args[1];
            break;
        }
        case mr::BuiltinId::Rm: {
            const std::string& name = name_arg(args[0], "rm");
            EnvObj* e = env_of(args[1], "rm: envir");
            materialize(e);
            auto it = std::find_if(e->bindings.begin(), e->bindings.end(),
                                   [&](const Binding& b) { return b.name == name; });
            if (it != e->bindings.end()) e->bindings.erase(it);
            break;
        }
        case mr::BuiltinId::Environment:
            result = Value::of_env(eval_env);
            break;
        case mr::BuiltinId::ParentFrame: {
            EnvObj* parent = global_;
            for (auto it = frames_.rbegin(); it != frames_.rend(); ++it)
                if (it->env == eval_env && it->fn && !it->fn->top_level) {
                    parent = it->call_env;
                    break;
                }
            result = Value::of_env(parent);
            break;
        }
        case mr::BuiltinId::SysFrame: {
            const Value& k = args[0];
            if (k.kind != Value::Kind::Vec || k.vec->type == Vec::Type::String || k.vec->size() != 1)
                raise(ErrorKind::TypeError, "sys.frame: invalid frame number");
            double d = k.vec->num[0];
            long top = current_frame();
            long idx = d >= 0 ? static_cast<long>(d) : top + static_cast<long>(d);
            if (d != static_cast<double>(static_cast<long>(d)) || idx < 0 || idx > top)
                raise(ErrorKind::OutOfRange, "sys.frame: not that many frames on the stack");
            EnvObj* e = frames_[idx].env;
            if (!e) throw std::logic_error("sys.frame: frame has no environment");
            result = Value::of_env(e);
            break;
        }
    }
    trace_builtin(desc->name, args, result);
    return result;
}

}  // namespace pir
