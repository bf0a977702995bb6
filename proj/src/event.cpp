#include "svm/event.hpp"

#include "svm/error.hpp"

namespace svm {

namespace {

Value make_record(Heap& heap, Heap::PinScope& pins, Value message, ChannelId chan, EventKind kind, Value wrap_fn) {
  CellRef c = heap.alloc(Value::integer(static_cast<std::int32_t>(kind)), wrap_fn);
  pins.add(Value::pair(c));
  CellRef b = heap.alloc(Value::channel(chan), Value::pair(c));
  pins.add(Value::pair(b));
  CellRef a = heap.alloc(message, Value::pair(b));
  return pins.add(Value::pair(a));
}

Value base_event(Heap& heap, const ChannelTable& channels, ChannelId chan, EventKind kind, Value message) {
  (void)channels.at(chan);
  Heap::PinScope pins(heap);
  pins.add(message);
  Value record = make_record(heap, pins, message, chan, kind, Value::identity());
  return Value::event(heap.alloc(record, Value::unit()));
}

bool is_applicable(Value v) { return v.is(Tag::Closure) || v.is(Tag::Label); }

}  // namespace

BaseEvent read_base_event(const Heap& heap, CellRef record) {
  Value msg = heap.fst(record);
  CellRef b = heap.snd(record).as_cell();
  CellRef c = heap.snd(b).as_cell();
  return BaseEvent{record, msg, heap.fst(b).as_channel(), static_cast<EventKind>(heap.fst(c).as_int()), heap.snd(c)};
}

std::vector<CellRef> event_records(const Heap& heap, Value list) {
  std::vector<CellRef> out;
  while (!list.is(Tag::Unit)) {
    if (!list.is(Tag::Event)) throw Error(ErrorCode::TypeConfusion, "expected an event, got " + to_string(list));
    out.push_back(heap.fst(list.as_cell()).as_cell());
    list = heap.snd(list.as_cell());
  }
  return out;
}

Value send_evt(Heap& heap, const ChannelTable& channels, ChannelId chan, Value message) {
  return base_event(heap, channels, chan, EventKind::Send, message);
}

Value recv_evt(Heap& heap, const ChannelTable& channels, ChannelId chan) {
  return base_event(heap, channels, chan, EventKind::Recv, Value::unit());
}

Value choose(Heap& heap, Value e1, Value e2) {
  auto records = event_records(heap, e1);
  (void)event_records(heap, e2);  // type check only
  Heap::PinScope pins(heap);
  pins.add(e1);
  Value rest = pins.add(e2);
  for (auto it = records.rbegin(); it != records.rend(); ++it)
    rest = pins.add(Value::event(heap.alloc(Value::pair(*it), rest)));
  return rest;
}

Value compose(Heap& heap, Value outer, Value inner, std::uint32_t compose_entry) {
  Heap::PinScope pins(heap);
  pins.add(outer);
  pins.add(inner);
  CellRef fns = heap.alloc(outer, inner);
  pins.add(Value::pair(fns));
  return Value::closure(heap.alloc(Value::label(compose_entry), Value::pair(fns)));
}

Value wrap(Heap& heap, Value e, Value fn, std::uint32_t compose_entry) {
  if (!is_applicable(fn)) throw Error(ErrorCode::TypeConfusion, "wrap with non-function " + to_string(fn));
  auto records = event_records(heap, e);
  Heap::PinScope pins(heap);
  pins.add(e);
  pins.add(fn);
  Value rest = Value::unit();
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    BaseEvent ev = read_base_event(heap, *it);
    Value w = ev.wrap.is(Tag::Identity) ? fn : pins.add(compose(heap, fn, ev.wrap, compose_entry));
    Value record = make_record(heap, pins, ev.message, ev.channel, ev.kind, w);
    rest = pins.add(Value::event(heap.alloc(record, rest)));
  }
  return rest;
}

std::vector<Instruction> compose_stub() {
  return {
      {Op::Push}, {Op::Push}, {Op::Fst}, {Op::Snd}, {Op::Swap}, {Op::Snd}, {Op::Cons}, {Op::App},
      {Op::Swap}, {Op::Fst},  {Op::Fst}, {Op::Swap}, {Op::Cons}, {Op::App}, {Op::Return},
  };
}

}  // namespace svm
