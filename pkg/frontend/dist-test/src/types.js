// Payload shapes of the gateway API and the view model they roll up into.
export {};
