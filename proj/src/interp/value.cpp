#include "pir/interp.hpp"

namespace pir {

const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::UnboundVariable: return "unbound-variable";
        case ErrorKind::NotAFunction: return "not-a-function";
        case ErrorKind::MissingArgumentUsed: return "missing-argument-used";
        case ErrorKind::ArityMismatch: return "arity-mismatch";
        case ErrorKind::TypeError: return "type-error";
        case ErrorKind::OutOfRange: return "out-of-range";
        case ErrorKind::PromiseRecursion: return "promise-recursion";
        case ErrorKind::StepLimit: return "step-limit";
        case ErrorKind::StackOverflow: return "stack-overflow";
    }
    return "?";
}

Value Value::of(Vec v) { return of(std::make_shared<const Vec>(std::move(v))); }

Value Value::of(std::shared_ptr<const Vec> v) {
    Value x;
    x.kind = Kind::Vec;
    x.vec = std::move(v);
    return x;
}

Value Value::of_env(EnvObj* e) {
    Value x;
    x.kind = Kind::Env;
    x.env = e;
    return x;
}

Value Value::of_closure(ClosureObj* c) {
    Value x;
    x.kind = Kind::Closure;
    x.closure = c;
    return x;
}

Value Value::of_promise(PromiseObj* p) {
    Value x;
    x.kind = Kind::Promise;
    x.promise = p;
    return x;
}

Value Value::of_builtin(mr::BuiltinId b) {
    Value x;
    x.kind = Kind::Builtin;
    x.builtin = b;
    return x;
}

Binding* EnvObj::find(const std::string& name) {
    for (auto& b : bindings)
        if (b.name == name) return &b;
    return nullptr;
}

std::string format_value(const Value& v) {
    switch (v.kind) {
        case Value::Kind::Missing: return "<missing>";
        case Value::Kind::Vec: return format_vec_value(*v.vec);
        case Value::Kind::Closure: return "<closure " + v.closure->fn->id + ">";
        case Value::Kind::Builtin:
            for (auto& b : mr::builtin_table())
                if (b.id == v.builtin) return "<builtin " + b.name + ">";
            return "<builtin>";
        case Value::Kind::Promise:
            return v.promise->has_memo ? format_value(v.promise->memo) : "<promise>";
        case Value::Kind::Env: return "<environment " + v.env->label + ">";
    }
    return "?";
}

}  // namespace pir
